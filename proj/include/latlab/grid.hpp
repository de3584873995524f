#ifndef LATLAB_GRID_HPP
#define LATLAB_GRID_HPP

// Uniform grids on an interval, a torus, or a rectangle, together with the
// forward-difference operators that define the discrete Sobolev norms.

#include "latlab/core.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>

namespace latlab {

enum class DomainKind { interval, torus, rectangle };

inline const char* to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::interval: return "interval";
    case DomainKind::torus: return "torus";
    case DomainKind::rectangle: return "rectangle";
  }
  return "?";
}

inline DomainKind domain_kind_from_string(const std::string& s) {
  if (s == "interval") return DomainKind::interval;
  if (s == "torus") return DomainKind::torus;
  if (s == "rectangle") return DomainKind::rectangle;
  throw PreconditionError("unknown domain kind '" + s + "'");
}

/// Planar point; one-dimensional domains only use the first coordinate.
using Point = Eigen::Vector2d;

class GridDomain {
 public:
  static GridDomain interval(int n, double a = 0.0, double b = 1.0) {
    return GridDomain(DomainKind::interval, n, {a, 0.0}, {b, 0.0});
  }
  static GridDomain torus(int n, double period = 1.0) {
    return GridDomain(DomainKind::torus, n, {0.0, 0.0}, {period, 0.0});
  }
  static GridDomain rectangle(int n, double a1 = 0.0, double b1 = 1.0, double a2 = 0.0,
                              double b2 = 1.0) {
    return GridDomain(DomainKind::rectangle, n, {a1, a2}, {b1, b2});
  }

  DomainKind kind() const { return kind_; }
  int n() const { return n_; }
  int dim() const { return kind_ == DomainKind::rectangle ? 2 : 1; }
  int size() const { return kind_ == DomainKind::rectangle ? n_ * n_ : n_; }
  bool periodic() const { return kind_ == DomainKind::torus; }
  bool has_boundary() const { return !periodic(); }

  double lower(int axis) const { return lo_[axis]; }
  double upper(int axis) const { return hi_[axis]; }
  double extent(int axis) const { return hi_[axis] - lo_[axis]; }

  double h(int axis = 0) const {
    return periodic() ? extent(axis) / n_ : extent(axis) / (n_ - 1);
  }
  /// Quadrature weight of one node.
  double cell_volume() const { return dim() == 2 ? h(0) * h(1) : h(0); }
  double max_h() const { return dim() == 2 ? std::max(h(0), h(1)) : h(0); }

  int index(int i, int j = 0) const { return j * n_ + i; }

  Point node(int idx) const {
    if (dim() == 1) return {lo_[0] + idx * h(0), 0.0};
    const int i = idx % n_;
    const int j = idx / n_;
    return {lo_[0] + i * h(0), lo_[1] + j * h(1)};
  }

  /// Closed-domain membership (the torus contains every point).
  bool contains_closed(const Point& p) const {
    if (periodic()) return true;
    for (int a = 0; a < dim(); ++a)
      if (p[a] < lo_[a] || p[a] > hi_[a]) return false;
    return true;
  }

  bool contains_open(const Point& p) const {
    if (periodic()) return true;
    for (int a = 0; a < dim(); ++a)
      if (!(p[a] > lo_[a] && p[a] < hi_[a])) return false;
    return true;
  }

  /// Euclidean distance from a point of the closed domain to the boundary.
  double boundary_distance(const Point& p) const {
    if (periodic()) return std::numeric_limits<double>::infinity();
    double d = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim(); ++a) d = std::min({d, p[a] - lo_[a], hi_[a] - p[a]});
    return d;
  }

  bool operator==(const GridDomain& o) const {
    return kind_ == o.kind_ && n_ == o.n_ && lo_ == o.lo_ && hi_ == o.hi_;
  }

 private:
  GridDomain(DomainKind kind, int n, std::array<double, 2> lo, std::array<double, 2> hi)
      : kind_(kind), n_(n), lo_(lo), hi_(hi) {
    if (n < 4) throw PreconditionError("grid needs at least 4 points per axis");
    for (int a = 0; a < dim(); ++a)
      if (!(hi_[a] > lo_[a])) throw PreconditionError("grid extent must be positive");
  }

  DomainKind kind_;
  int n_;
  std::array<double, 2> lo_;
  std::array<double, 2> hi_;
};

class GridFunction {
 public:
  GridFunction(GridDomain domain, Vector values) : domain_(domain), values_(std::move(values)) {
    require_size(values_, domain_.size(), "GridFunction");
  }

  static GridFunction zeros(const GridDomain& domain) {
    return {domain, Vector::Zero(domain.size())};
  }

  template <class F>
  static GridFunction sample(const GridDomain& domain, F&& f) {
    Vector v(domain.size());
    for (int i = 0; i < domain.size(); ++i) {
      const Point p = domain.node(i);
      if constexpr (std::is_invocable_v<F, double>)
        v[i] = f(p[0]);
      else
        v[i] = f(p);
    }
    return {domain, std::move(v)};
  }

  const GridDomain& domain() const { return domain_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  double operator[](int i) const { return values_[i]; }

 private:
  GridDomain domain_;
  Vector values_;
};

/// CSV with a `# domain=<kind>,n=<n>,h=<h>` header and one value per line.
inline void write_csv(std::ostream& out, const GridFunction& f) {
  const auto& d = f.domain();
  out << "# domain=" << to_string(d.kind()) << ",n=" << d.n() << ",h=" << std::setprecision(17)
      << d.h(0) << "\n";
  for (int i = 0; i < f.values().size(); ++i) out << std::setprecision(17) << f[i] << "\n";
}

inline GridFunction read_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# domain=", 0) != 0)
    throw PreconditionError("grid function CSV: missing '# domain=' header");
  std::string kind;
  int n = 0;
  double h = 0.0;
  std::stringstream fields(header.substr(2));
  std::string field;
  while (std::getline(fields, field, ',')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw PreconditionError("grid function CSV: bad header field");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "domain") kind = value;
    else if (key == "n") n = std::stoi(value);
    else if (key == "h") h = std::stod(value);
  }
  const DomainKind k = domain_kind_from_string(kind);
  if (!(h > 0.0)) throw PreconditionError("grid function CSV: spacing must be positive");
  GridDomain domain = k == DomainKind::torus      ? GridDomain::torus(n, h * n)
                      : k == DomainKind::interval ? GridDomain::interval(n, 0.0, h * (n - 1))
                                                  : GridDomain::rectangle(n, 0.0, h * (n - 1), 0.0,
                                                                          h * (n - 1));
  Vector values(domain.size());
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (count >= domain.size())
      throw PreconditionError("grid function CSV: more values than nodes");
    values[count++] = std::stod(line);
  }
  if (count != domain.size())
    throw PreconditionError("grid function CSV: expected " + std::to_string(domain.size()) +
                            " values, got " + std::to_string(count));
  return {domain, std::move(values)};
}

namespace detail {

inline Operator forward_difference_1d(int n, double h, bool periodic) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    int from = i;
    int to = i + 1;
    if (to == n) {
      if (periodic) {
        to = 0;
      } else {
        from = n - 2;  // one-sided at the right end
        to = n - 1;
      }
    }
    t.emplace_back(i, to, 1.0 / h);
    t.emplace_back(i, from, -1.0 / h);
  }
  Operator d(n, n);
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

inline Operator identity(int n) {
  Operator id(n, n);
  id.setIdentity();
  return id;
}

// kron(A, B) for sparse square operators.
inline Operator kron(const Operator& A, const Operator& B) {
  std::vector<Eigen::Triplet<double>> t;
  for (int ka = 0; ka < A.outerSize(); ++ka)
    for (Operator::InnerIterator a(A, ka); a; ++a)
      for (int kb = 0; kb < B.outerSize(); ++kb)
        for (Operator::InnerIterator b(B, kb); b; ++b)
          t.emplace_back(a.row() * B.rows() + b.row(), a.col() * B.cols() + b.col(),
                         a.value() * b.value());
  Operator out(A.rows() * B.rows(), A.cols() * B.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace detail

/// Forward difference along one axis (one-sided at the far end of an interval).
inline Operator difference_operator(const GridDomain& domain, int axis) {
  const int n = domain.n();
  Operator d1 = detail::forward_difference_1d(n, domain.h(axis), domain.periodic());
  if (domain.dim() == 1) return d1;
  // node index = j * n + i with i along axis 0
  return axis == 0 ? detail::kron(detail::identity(n), d1) : detail::kron(d1, detail::identity(n));
}

/// All D^alpha with |alpha| <= k, the identity first.
inline std::vector<Operator> derivative_operators(const GridDomain& domain, int k) {
  if (k < 0) throw PreconditionError("derivative order must be nonnegative");
  if (k > domain.n() - 2) throw PreconditionError("derivative order too large for grid");
  std::vector<Operator> ops;
  if (domain.dim() == 1) {
    const Operator d = difference_operator(domain, 0);
    Operator power = detail::identity(domain.size());
    for (int j = 0; j <= k; ++j) {
      ops.push_back(power);
      power = Operator(d * power);
    }
    return ops;
  }
  const Operator dx = difference_operator(domain, 0);
  const Operator dy = difference_operator(domain, 1);
  for (int total = 0; total <= k; ++total) {
    for (int ax = total; ax >= 0; --ax) {
      Operator op = detail::identity(domain.size());
      for (int j = 0; j < ax; ++j) op = Operator(dx * op);
      for (int j = 0; j < total - ax; ++j) op = Operator(dy * op);
      ops.push_back(op);
    }
  }
  return ops;
}

/// Discrete L^p norm (h^d sum |v_i|^p)^(1/p).
inline double lp_norm(const GridDomain& domain, const Vector& v, double p) {
  return std::pow(domain.cell_volume() * v.cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

inline double sup_norm(const Vector& v) { return max_abs(v); }

}  // namespace latlab

#endif  // LATLAB_GRID_HPP
