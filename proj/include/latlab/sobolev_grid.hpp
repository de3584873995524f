#ifndef LATLAB_SOBOLEV_GRID_HPP
#define LATLAB_SOBOLEV_GRID_HPP

// Mollifiers on grids, affine boundary charts with a partition of unity, the
// push-in operators S_n built from them, R_n = rho_n * S_n, and the positive
// dominant of a W_0^{k,p} function on an interval.

#include "latlab/norms.hpp"
#include "latlab/span_lattice.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace latlab {

class ContainmentError : public Error {
 public:
  ContainmentError(const std::string& what, Point sample, long n)
      : Error(what), sample(sample), n(n) {}
  Point sample;
  long n;
};

class CoverError : public Error {
 public:
  CoverError(const std::string& what, Point sample) : Error(what), sample(sample) {}
  Point sample;
};

inline double sobolev_norm(const GridFunction& f, int k, double p) {
  return NormSpec::sobolev(f.domain(), k, p)(f.values());
}

inline DualNormValue negative_sobolev_bounds(const GridFunction& g, int k, double p) {
  return NormSpec::dual_sobolev(g.domain(), k, p).dual(g.values());
}

inline double negative_sobolev_norm(const GridFunction& g, int k, double p) {
  return negative_sobolev_bounds(g, k, p).lower;
}

// ---------------------------------------------------------------- mollifier

/// rho(t) = c exp(-1/(1 - t^2)) on |t| < 1, radial in two dimensions, with c
/// fixed by adaptive quadrature so that the continuous integral is 1.
class Mollifier {
 public:
  explicit Mollifier(int dim = 1) : dim_(dim) {
    if (dim != 1 && dim != 2) throw PreconditionError("mollifier dimension must be 1 or 2");
    using boost::math::quadrature::gauss_kronrod;
    double mass = 0.0;
    if (dim == 1) {
      mass = gauss_kronrod<double, 61>::integrate([](double t) { return bump(t); }, -1.0, 1.0, 15, 1e-14);
    } else {
      constexpr double two_pi = 6.283185307179586476925;
      mass = two_pi * gauss_kronrod<double, 61>::integrate([](double r) { return r * bump(r); }, 0.0,
                                                           1.0, 15, 1e-14);
    }
    c_ = 1.0 / mass;
  }

  int dim() const { return dim_; }
  double constant() const { return c_; }

  /// Profile at distance t from the origin (unscaled).
  double operator()(double t) const { return c_ * bump(t); }

  static double bump(double t) {
    const double a = std::abs(t);
    return a < 1.0 ? std::exp(-1.0 / (1.0 - a * a)) : 0.0;
  }

 private:
  int dim_;
  double c_ = 1.0;
};

/// Node weights of rho_delta on a grid, renormalized to sum 1.
struct DiscreteKernel {
  int radius0 = 0;  // offsets -radius0..radius0 along axis 0
  int radius1 = 0;  // and along axis 1 (0 in one dimension)
  Matrix weights;   // (2 radius0 + 1) x (2 radius1 + 1)
  double raw_integral = 0.0;  // h^d sum rho_delta before renormalization

  double at(int i, int j = 0) const { return weights(i + radius0, j + radius1); }
};

inline DiscreteKernel mollifier_kernel(const GridDomain& domain, double delta) {
  if (!(delta > 0.0)) throw PreconditionError("mollifier scale must be positive");
  const Mollifier rho(domain.dim());
  DiscreteKernel k;
  const double h0 = domain.h(0);
  const double h1 = domain.dim() == 2 ? domain.h(1) : 1.0;
  k.radius0 = static_cast<int>(std::ceil(delta / h0));
  k.radius1 = domain.dim() == 2 ? static_cast<int>(std::ceil(delta / h1)) : 0;
  k.weights = Matrix::Zero(2 * k.radius0 + 1, 2 * k.radius1 + 1);
  const double scale = std::pow(delta, -domain.dim()) * domain.cell_volume();
  for (int i = -k.radius0; i <= k.radius0; ++i)
    for (int j = -k.radius1; j <= k.radius1; ++j) {
      const double t = domain.dim() == 2 ? std::hypot(i * h0, j * h1) / delta : std::abs(i * h0) / delta;
      k.weights(i + k.radius0, j + k.radius1) = scale * rho(t);
    }
  k.raw_integral = k.weights.sum();
  k.weights /= k.raw_integral;
  return k;
}

/// Convolution with rho_delta: periodic on the torus, zero extension on
/// bounded domains. No resolution check; for delta <= h it is the identity.
inline Operator convolution_operator(const GridDomain& domain, double delta) {
  const DiscreteKernel k = mollifier_kernel(domain, delta);
  const int n = domain.n();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(domain.size()) * k.weights.size());
  auto wrap = [&](int i, bool& inside) {
    if (domain.periodic()) return ((i % n) + n) % n;
    inside = inside && i >= 0 && i < n;
    return i;
  };
  for (int out = 0; out < domain.size(); ++out) {
    const int i = out % n;
    const int j = domain.dim() == 2 ? out / n : 0;
    for (int a = -k.radius0; a <= k.radius0; ++a)
      for (int b = -k.radius1; b <= k.radius1; ++b) {
        const double w = k.at(a, b);
        if (w == 0.0) continue;
        bool inside = true;
        const int si = wrap(i - a, inside);
        const int sj = domain.dim() == 2 ? wrap(j - b, inside) : 0;
        if (inside) t.emplace_back(out, domain.index(si, sj), w);
      }
  }
  Operator c(domain.size(), domain.size());
  c.setFromTriplets(t.begin(), t.end());
  return c;
}

inline GridFunction mollify(const GridFunction& f, double delta) {
  const GridDomain& d = f.domain();
  if (delta < 2.0 * d.max_h())
    throw PreconditionError("mollifier scale " + std::to_string(delta) +
                            " is below twice the grid spacing");
  return {d, convolution_operator(d, delta) * f.values()};
}

/// J = id, R_n = convolution with rho_{1/n}.
inline ApproximationScheme mollifier_scheme(const GridDomain& domain, long n_max = 1L << 16) {
  ApproximationScheme s;
  s.J = detail::identity(domain.size());
  s.R = [domain](long n) { return convolution_operator(domain, 1.0 / static_cast<double>(n)); };
  s.n_min = 2;
  s.n_max = n_max;
  return s;
}

// ---------------------------------------------------------------- charts

namespace detail {

inline double smootherstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

// C^2 bump supported in [a + m, b - m] with m 5% of the width.
inline double box_bump(double u, double a, double b) {
  const double w = b - a;
  const double m = 0.05 * w;
  return smootherstep((u - a - m) / (0.25 * w)) * smootherstep((b - m - u) / (0.25 * w));
}

}  // namespace detail

enum class ChartKind { interior, edge, corner };

/// A neighbourhood V of x0 and compressions A_n with A_n(closure(Omega n V))
/// inside Omega. Boundary charts work in a local frame u = Q (x - x0) whose
/// last axis is the inward normal; V = (-delta, delta)^{d-1} x (-r/4, 3r/4)
/// and Omega n V = {u_d > F(u')} with F = 0 on edges and F = |u_1| at corners.
class BoundaryChart {
 public:
  BoundaryChart(ChartKind kind, int dim, Point x0, double r, Eigen::Matrix2d Q)
      : kind_(kind), dim_(dim), x0_(x0), r_(r), delta_(0.9 * r / 8.0), Q_(Q) {}

  ChartKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Point& center() const { return x0_; }
  double radius() const { return r_; }
  double tangent_halfwidth() const { return delta_; }
  const Eigen::Matrix2d& frame() const { return Q_; }

  Point to_local(const Point& x) const { return Q_ * (x - x0_); }
  Point to_global(const Point& u) const { return x0_ + Q_.transpose() * u; }

  /// Center of compression in local coordinates.
  Point compression_center() const {
    Point c = Point::Zero();
    if (kind_ != ChartKind::interior) c[dim_ - 1] = r_ / 4.0;
    return c;
  }

  bool in_V(const Point& x, bool closed = false) const {
    const Point u = to_local(x);
    auto lt = [closed](double a, double b) { return closed ? a <= b : a < b; };
    if (kind_ == ChartKind::interior) {
      const double norm = dim_ == 1 ? std::abs(u[0]) : u.norm();
      return lt(norm, r_);
    }
    if (dim_ == 2 && !lt(std::abs(u[0]), delta_)) return false;
    const double un = u[dim_ - 1];
    return lt(-r_ / 4.0, un) && lt(un, 0.75 * r_);
  }

  Point apply(long n, const Point& x) const { return compress(x, 1.0 - 1.0 / static_cast<double>(n)); }
  Point apply_inverse(long n, const Point& x) const {
    return compress(x, 1.0 / (1.0 - 1.0 / static_cast<double>(n)));
  }

  /// A_n(x) = B_n x + b_n in global coordinates.
  Eigen::Matrix2d B(long n) const {
    const Eigen::Matrix2d D = scaling(1.0 - 1.0 / static_cast<double>(n));
    Eigen::Matrix2d out = Q_.transpose() * D * Q_;
    if (dim_ == 1) out(1, 1) = 1.0, out(0, 1) = out(1, 0) = 0.0;
    return out;
  }
  Point b(long n) const { return apply(n, Point::Zero()); }

  /// Unnormalized partition-of-unity bump, supported compactly inside V.
  double bump(const Point& x) const {
    const Point u = to_local(x);
    if (kind_ == ChartKind::interior) {
      const double norm = dim_ == 1 ? std::abs(u[0]) : u.norm();
      return detail::smootherstep((0.95 * r_ - norm) / (0.5 * r_));
    }
    double v = detail::box_bump(u[dim_ - 1], -r_ / 4.0, 0.75 * r_);
    if (dim_ == 2) v *= detail::box_bump(u[0], -delta_, delta_);
    return v;
  }

  /// Uniform sample from the bounding box of V in local coordinates.
  Point sample_local(Rng& rng) const {
    Point u = Point::Zero();
    if (kind_ == ChartKind::interior) {
      for (int a = 0; a < dim_; ++a) u[a] = rng.uniform(-r_, r_);
      return u;
    }
    if (dim_ == 2) u[0] = rng.uniform(-delta_, delta_);
    u[dim_ - 1] = rng.uniform(-r_ / 4.0, 0.75 * r_);
    return u;
  }

 private:
  Eigen::Matrix2d scaling(double factor) const {
    Eigen::Matrix2d D = Eigen::Matrix2d::Identity();
    if (kind_ == ChartKind::interior) D *= factor;
    else D(dim_ - 1, dim_ - 1) = factor;
    if (dim_ == 1) D(1, 1) = 1.0;
    return D;
  }

  Point compress(const Point& x, double factor) const {
    const Point c = compression_center();
    Point u = to_local(x);
    if (kind_ == ChartKind::interior) {
      for (int a = 0; a < dim_; ++a) u[a] = factor * (u[a] - c[a]) + c[a];
    } else {
      u[dim_ - 1] = factor * (u[dim_ - 1] - c[dim_ - 1]) + c[dim_ - 1];
    }
    Point out = to_global(u);
    if (dim_ == 1) out[1] = x[1];
    return out;
  }

  ChartKind kind_;
  int dim_;
  Point x0_;
  double r_;
  double delta_;
  Eigen::Matrix2d Q_;
};

struct ChartAudit {
  long samples = 0;
  long violations = 0;
  std::optional<std::pair<Point, long>> first_violation;  // (sample, n)
};

inline const std::vector<long>& chart_audit_indices() {
  static const std::vector<long> ns{2, 4, 8, 16, 32, 64};
  return ns;
}

/// Samples closure(Omega n V), including points on the boundary of Omega, and
/// checks that A_n maps every sample into the open domain.
inline ChartAudit audit_chart(const BoundaryChart& chart, const GridDomain& domain,
                              const std::vector<long>& ns, long samples = 10000,
                              std::uint64_t seed = 0xc4a7) {
  ChartAudit out;
  Rng rng(seed);
  std::vector<Point> pts;
  pts.reserve(samples);
  pts.push_back(chart.center());
  const bool boundary = chart.kind() != ChartKind::interior;
  while (static_cast<long>(pts.size()) < samples) {
    Point u = chart.sample_local(rng);
    if (boundary && pts.size() % 10 == 0) {
      // force a point of the boundary graph u_d = F(u')
      u[chart.dim() - 1] = chart.kind() == ChartKind::corner ? std::abs(u[0]) : 0.0;
    }
    Point x = chart.to_global(u);
    if (chart.dim() == 1) x[1] = 0.0;
    if (!chart.in_V(x, true) || !domain.contains_closed(x)) continue;
    pts.push_back(x);
  }
  for (long n : ns) {
    for (const Point& x : pts) {
      ++out.samples;
      if (!domain.contains_open(chart.apply(n, x))) {
        ++out.violations;
        if (!out.first_violation) out.first_violation = std::make_pair(x, n);
      }
    }
  }
  return out;
}

namespace detail {

inline Eigen::Matrix2d frame_from_normal(const Point& normal) {
  const Point nn = normal.normalized();
  Eigen::Matrix2d Q;
  Q.row(0) = Point(nn[1], -nn[0]).transpose();
  Q.row(1) = nn.transpose();
  return Q;
}

}  // namespace detail

/// Chart at x0 with radius r (r <= 0 picks a default). The sampled
/// containment audit runs for n in {2, ..., 64}; a violation throws.
inline BoundaryChart build_boundary_chart(const GridDomain& domain, const Point& x0, double r = 0.0,
                                          long audit_samples = 10000) {
  if (!domain.has_boundary()) throw PreconditionError("charts need a domain with boundary");
  if (!domain.contains_closed(x0)) throw PreconditionError("chart center lies outside the domain");
  const int d = domain.dim();
  const double dist = domain.boundary_distance(x0);
  std::optional<BoundaryChart> chart;
  if (dist > 0.0) {
    if (r <= 0.0) r = 0.9 * dist;
    if (r > dist) throw PreconditionError("interior chart ball leaves the domain");
    chart.emplace(ChartKind::interior, d, x0, r, Eigen::Matrix2d::Identity());
  } else if (d == 1) {
    const bool left = x0[0] == domain.lower(0);
    if (r <= 0.0) r = 0.5 * domain.extent(0);
    if (r > domain.extent(0)) throw PreconditionError("endpoint chart radius exceeds the interval");
    Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
    Q(0, 0) = left ? 1.0 : -1.0;
    chart.emplace(ChartKind::edge, 1, x0, r, Q);
  } else {
    // which sides does x0 touch?
    Point normal = Point::Zero();
    int touching = 0;
    for (int a = 0; a < 2; ++a) {
      if (x0[a] == domain.lower(a)) normal[a] = 1.0, ++touching;
      else if (x0[a] == domain.upper(a)) normal[a] = -1.0, ++touching;
    }
    const Eigen::Matrix2d Q = detail::frame_from_normal(normal);
    if (touching == 2) {
      const double limit = std::min(domain.extent(0), domain.extent(1));
      if (r <= 0.0) r = 0.5 * limit;
      if (r > limit) throw PreconditionError("corner chart radius reaches the opposite sides");
      chart.emplace(ChartKind::corner, 2, x0, r, Q);
    } else {
      const int along = normal[0] != 0.0 ? 1 : 0;  // tangent axis
      const int across = 1 - along;
      const double limit = std::min({x0[along] - domain.lower(along), domain.upper(along) - x0[along],
                                     domain.extent(across)});
      if (r <= 0.0) r = 0.5 * limit;
      if (!(r > 0.0) || r > limit) throw PreconditionError("edge chart radius reaches another side");
      chart.emplace(ChartKind::edge, 2, x0, r, Q);
    }
  }
  if (audit_samples > 0) {
    const ChartAudit audit = audit_chart(*chart, domain, chart_audit_indices(), audit_samples);
    if (audit.violations > 0)
      throw ContainmentError("chart compression leaves the domain", audit.first_violation->first,
                             audit.first_violation->second);
  }
  return *chart;
}

/// Charts covering the closed domain together with the normalized partition
/// of unity h_y = phi_y / sum phi.
class ChartCover {
 public:
  ChartCover(GridDomain domain, std::vector<BoundaryChart> charts)
      : domain_(domain), charts_(std::move(charts)) {}

  const GridDomain& domain() const { return domain_; }
  const std::vector<BoundaryChart>& charts() const { return charts_; }

  double bump_sum(const Point& x) const {
    double s = 0.0;
    for (const auto& c : charts_) s += c.bump(x);
    return s;
  }

  /// h_y(x) for every chart y; throws if x is not covered.
  std::vector<double> partition(const Point& x) const {
    std::vector<double> out(charts_.size());
    double s = 0.0;
    for (std::size_t i = 0; i < charts_.size(); ++i) s += out[i] = charts_[i].bump(x);
    if (!(s > 0.0)) throw CoverError("point of the closed domain is not covered", x);
    for (double& v : out) v /= s;
    return out;
  }

  /// Every node plus `samples` random points (a tenth of them on the
  /// boundary) must have a positive bump sum.
  void verify(long samples = 40000, std::uint64_t seed = 0xc0de) const {
    for (int i = 0; i < domain_.size(); ++i)
      if (!(bump_sum(domain_.node(i)) > 0.0)) throw CoverError("grid node not covered", domain_.node(i));
    Rng rng(seed);
    for (long s = 0; s < samples; ++s) {
      const Point x = random_point(rng, s % 10 == 0);
      if (!(bump_sum(x) > 0.0)) throw CoverError("sample point not covered", x);
    }
  }

  Point random_point(Rng& rng, bool on_boundary) const {
    Point x = Point::Zero();
    for (int a = 0; a < domain_.dim(); ++a) x[a] = rng.uniform(domain_.lower(a), domain_.upper(a));
    if (on_boundary) {
      const int a = domain_.dim() == 1 ? 0 : rng.index(2);
      x[a] = rng.uniform() < 0.5 ? domain_.lower(a) : domain_.upper(a);
    }
    return x;
  }

 private:
  GridDomain domain_;
  std::vector<BoundaryChart> charts_;
};

namespace detail {

inline std::vector<BoundaryChart> rectangle_charts(const GridDomain& d) {
  std::vector<BoundaryChart> charts;
  const double side = std::min(d.extent(0), d.extent(1));
  for (int cx = 0; cx < 2; ++cx)
    for (int cy = 0; cy < 2; ++cy)
      charts.push_back(build_boundary_chart(
          d, Point(cx ? d.upper(0) : d.lower(0), cy ? d.upper(1) : d.lower(1)), 0.5 * side));
  // Along each side, the corner chart covers boundary points within
  // sqrt(2) * 0.9 * delta_c of the corner; edge charts continue from there,
  // each covering |t - center| < 0.9 * 0.9 r / 8 of the side.
  const double corner_reach = 0.8 * std::sqrt(2.0) * 0.9 * (0.9 * 0.5 * side / 8.0);
  for (int across = 0; across < 2; ++across) {
    const int along = 1 - across;
    const double len = d.extent(along);
    const double depth = d.extent(across);
    for (int high = 0; high < 2; ++high) {
      const double fixed = high ? d.upper(across) : d.lower(across);
      auto radius = [&](double t) { return 0.95 * std::min({t, len - t, depth}); };
      double covered = corner_reach;
      int guard = 0;
      while (covered < len - corner_reach) {
        if (++guard > 10000) throw CoverError("edge cover did not terminate", Point::Zero());
        // largest center t with t - 0.07 r(t) <= covered
        double lo = covered, hi = len;
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (lo + hi);
          (mid - 0.07 * radius(mid) <= covered ? lo : hi) = mid;
        }
        const double rr = radius(lo);
        Point x0;
        x0[along] = d.lower(along) + lo;
        x0[across] = fixed;
        charts.push_back(build_boundary_chart(d, x0, rr));
        covered = lo + 0.07 * rr;
      }
    }
  }
  // Interior balls at uncovered points, largest distance first.
  std::vector<Point> candidates;
  const int m = std::max(2 * d.n(), 160);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j)
      candidates.emplace_back(d.lower(0) + d.extent(0) * i / m, d.lower(1) + d.extent(1) * j / m);
  for (int i = 0; i < d.size(); ++i) candidates.push_back(d.node(i));
  std::stable_sort(candidates.begin(), candidates.end(), [&](const Point& a, const Point& b) {
    return d.boundary_distance(a) > d.boundary_distance(b);
  });
  for (const Point& x : candidates) {
    double sum = 0.0;
    for (const auto& c : charts) sum += c.bump(x);
    if (sum >= 1e-3) continue;
    const double dist = d.boundary_distance(x);
    if (dist < 1e-3 * side) throw CoverError("boundary point not covered by edge charts", x);
    charts.push_back(build_boundary_chart(d, x, 0.9 * dist));
  }
  return charts;
}

}  // namespace detail

/// Interval: both endpoints (r = L/2) and the midpoint (r = L/4). Rectangle:
/// four corners, edge charts along each side, interior balls.
inline ChartCover build_chart_cover(const GridDomain& domain) {
  if (!domain.has_boundary()) throw PreconditionError("chart cover needs a domain with boundary");
  std::vector<BoundaryChart> charts;
  if (domain.dim() == 1) {
    const double L = domain.extent(0);
    charts.push_back(build_boundary_chart(domain, Point(domain.lower(0), 0.0), 0.5 * L));
    charts.push_back(build_boundary_chart(domain, Point(domain.upper(0), 0.0), 0.5 * L));
    charts.push_back(build_boundary_chart(domain, Point(domain.lower(0) + 0.5 * L, 0.0), 0.25 * L));
  } else {
    charts = detail::rectangle_charts(domain);
  }
  ChartCover cover(domain, std::move(charts));
  cover.verify();
  return cover;
}

// ---------------------------------------------------------------- push-in

struct PushIn {
  Operator S;
  std::vector<char> in_K;          // node mask of K_n
  double boundary_distance = 0.0;  // node-set dist(K_n, boundary)
  long n = 0;
};

namespace detail {

// Linear / bilinear interpolation weights at p (clamped to the closed box).
inline void interpolation_weights(const GridDomain& d, const Point& p,
                                  std::vector<std::pair<int, double>>& out) {
  out.clear();
  int base[2] = {0, 0};
  double frac[2] = {0.0, 0.0};
  for (int a = 0; a < d.dim(); ++a) {
    const double s = (p[a] - d.lower(a)) / d.h(a);
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, d.n() - 2);
    base[a] = i;
    frac[a] = std::clamp(s - i, 0.0, 1.0);
  }
  if (d.dim() == 1) {
    out.emplace_back(base[0], 1.0 - frac[0]);
    out.emplace_back(base[0] + 1, frac[0]);
    return;
  }
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      out.emplace_back(d.index(base[0] + di, base[1] + dj),
                       (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]));
}

inline bool in_closed_domain(const GridDomain& d, const Point& p) {
  for (int a = 0; a < d.dim(); ++a) {
    const double tol = 1e-12 * d.extent(a);
    if (p[a] < d.lower(a) - tol || p[a] > d.upper(a) + tol) return false;
  }
  return true;
}

}  // namespace detail

/// S_n f = sum_y T_{y,n}(f h_y) with T f = f o A_{y,n}^{-1}, f extended by
/// zero outside the closed domain and evaluated by linear interpolation.
inline PushIn pushin_operator(const ChartCover& cover, long n) {
  if (n < 2) throw PreconditionError("push-in index must be >= 2");
  const GridDomain& d = cover.domain();
  PushIn out;
  out.n = n;
  out.in_K.assign(d.size(), 0);
  out.boundary_distance = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Triplet<double>> t;
  std::vector<std::pair<int, double>> interp;
  const auto& charts = cover.charts();
  for (int i = 0; i < d.size(); ++i) {
    const Point x = d.node(i);
    for (const auto& chart : charts) {
      const Point p = chart.apply_inverse(n, x);
      if (!detail::in_closed_domain(d, p) || !chart.in_V(p, true)) continue;
      out.in_K[i] = 1;
      const double phi = chart.bump(p);
      if (phi == 0.0) continue;
      const double weight = cover.partition(p)[&chart - charts.data()];
      detail::interpolation_weights(d, p, interp);
      for (const auto& [j, w] : interp)
        if (w > 0.0) t.emplace_back(i, j, weight * w);
    }
    if (out.in_K[i]) out.boundary_distance = std::min(out.boundary_distance, d.boundary_distance(x));
  }
  out.S = Operator(d.size(), d.size());
  out.S.setFromTriplets(t.begin(), t.end());
  return out;
}

inline PushIn pushin_operator(const GridDomain& domain, long n) {
  return pushin_operator(build_chart_cover(domain), n);
}

struct BoundaryApproximation {
  Operator R;
  double delta = 0.0;  // dist(K_n, boundary) / 3
  PushIn pushin;
};

/// R_n f = rho_{delta_n} * (S_n f) with delta_n = dist(K_n, boundary) / 3.
inline BoundaryApproximation approx_identity_with_boundary(const ChartCover& cover, long n) {
  BoundaryApproximation out;
  out.pushin = pushin_operator(cover, n);
  out.delta = out.pushin.boundary_distance / 3.0;
  const GridDomain& d = cover.domain();
  if (out.delta < 2.0 * d.max_h())
    throw PreconditionError("grid too coarse: delta_" + std::to_string(n) + " = " +
                            std::to_string(out.delta) + " is below twice the spacing");
  out.R = Operator(convolution_operator(d, out.delta) * out.pushin.S);
  return out;
}

inline BoundaryApproximation approx_identity_with_boundary(const GridDomain& domain, long n) {
  return approx_identity_with_boundary(build_chart_cover(domain), n);
}

// ---------------------------------------------------------------- 1-D dominant

namespace detail {

// (I v)_0 = 0, (I v)_i = h sum_{j<i} v_j
inline Vector cumulative_integral(const Vector& v, double h) {
  Vector out = Vector::Zero(v.size());
  for (Eigen::Index i = 1; i < v.size(); ++i) out[i] = out[i - 1] + h * v[i - 1];
  return out;
}

inline Vector integrate_modulus_of_derivative(const Vector& f, int k, double h, const Operator& D) {
  Vector dk = f;
  for (int j = 0; j < k; ++j) dk = D * dk;
  Vector g = dk.cwiseAbs();
  for (int j = 0; j < k; ++j) g = cumulative_integral(g, h);
  return g;
}

}  // namespace detail

/// Positive g in W_0^{k,p} with g >= f: f0 integrates |D^k f| k times from the
/// left, f1 from the right, and g = u0 f0 + u1 f1 with smooth cutoffs
/// u0 = 1 on [0, 1/2], 0 on [3/4, 1] and u1 = 1 on [1/2, 1], 0 on [0, 1/4].
inline GridFunction positive_dominant_w0(const GridFunction& f, int k, double p) {
  const GridDomain& d = f.domain();
  if (d.kind() != DomainKind::interval) throw PreconditionError("positive dominant needs an interval");
  if (k < 1) throw PreconditionError("order k must be >= 1");
  if (!(p >= 1.0)) throw PreconditionError("exponent p must be >= 1");
  const int n = d.n();
  if (2 * k >= n) throw PreconditionError("grid too small for the order");
  const Vector& v = f.values();
  const double scale = std::max(1.0, max_abs(v));
  for (int i = 0; i < k; ++i)
    if (std::abs(v[i]) > 1e-8 * scale || std::abs(v[n - 1 - i]) > 1e-8 * scale)
      throw PreconditionError("function does not vanish to order k-1 at the endpoints");
  const double h = d.h(0);
  const Operator D = difference_operator(d, 0);
  const Vector f0 = detail::integrate_modulus_of_derivative(v, k, h, D);
  const Vector f1 = detail::integrate_modulus_of_derivative(v.reverse(), k, h, D).reverse();
  Vector g(n);
  for (int i = 0; i < n; ++i) {
    const double t = (d.node(i)[0] - d.lower(0)) / d.extent(0);
    const double u0 = 1.0 - detail::smootherstep((t - 0.5) / 0.25);
    const double u1 = detail::smootherstep((t - 0.25) / 0.25);
    g[i] = u0 * f0[i] + u1 * f1[i];
  }
  return {d, std::move(g)};
}

}  // namespace latlab

#endif  // LATLAB_SOBOLEV_GRID_HPP
