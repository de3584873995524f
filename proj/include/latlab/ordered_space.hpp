#ifndef LATLAB_ORDERED_SPACE_HPP
#define LATLAB_ORDERED_SPACE_HPP

// Polyhedral cones in R^d, the order they induce, and brute-force lattice
// oracles used to validate the constructive suprema elsewhere.

#include "latlab/lp.hpp"
#include "latlab/norms.hpp"

#include <optional>

namespace latlab {

/// The cone {x : ineq * x >= 0}.
class PolyhedralCone {
 public:
  explicit PolyhedralCone(Matrix ineq) : ineq_(std::move(ineq)) {
    if (ineq_.cols() == 0) throw PreconditionError("cone dimension must be positive");
    // {x : Ax >= 0, -Ax >= 0} = ker A, so pointedness is full column rank.
    Eigen::FullPivLU<Matrix> lu(ineq_);
    lu.setThreshold(1e-12);
    if (ineq_.rows() == 0 || lu.rank() < ineq_.cols())
      throw DegenerateCone("cone is not pointed: inequality system has rank " +
                           std::to_string(ineq_.rows() == 0 ? 0 : lu.rank()) + " < " +
                           std::to_string(ineq_.cols()));
    standard_ = detect_standard();
  }

  static PolyhedralCone standard(int dim) { return PolyhedralCone(Matrix::Identity(dim, dim)); }

  int dim() const { return static_cast<int>(ineq_.cols()); }
  const Matrix& ineq() const { return ineq_; }

  /// True when the cone is the nonnegative orthant (rows are positive
  /// multiples of distinct unit vectors covering every coordinate).
  bool is_standard() const { return standard_; }

  bool contains(const Vector& x, double tol = kMembershipTol) const {
    require_size(x, dim(), "cone membership");
    if (standard_) return x.size() == 0 || x.minCoeff() >= -tol;
    return (ineq_ * x).minCoeff() >= -tol;
  }

  /// x <= y in the cone order.
  bool less_equal(const Vector& x, const Vector& y, double tol = kMembershipTol) const {
    require_size(x, dim(), "cone order");
    return contains(y - x, tol);
  }

  /// Extreme rays as unit-length columns. Requires dim - 1 <= rows and caps
  /// the subset enumeration at `max_subsets`.
  Matrix extreme_rays(long max_subsets = 2'000'000) const {
    const int d = dim();
    const int m = static_cast<int>(ineq_.rows());
    std::vector<Vector> rays;
    auto add_ray = [&](Vector v) {
      v /= v.norm();
      for (const auto& r : rays)
        if ((r - v).cwiseAbs().maxCoeff() <= 1e-9) return;
      rays.push_back(std::move(v));
    };
    if (d == 1) {
      for (double s : {1.0, -1.0}) {
        Vector v = Vector::Constant(1, s);
        if (contains(v)) add_ray(v);
      }
      return to_columns(rays, d);
    }
    const double row_scale = std::max(1.0, ineq_.cwiseAbs().maxCoeff());
    std::vector<int> pick(d - 1);
    for (int i = 0; i < d - 1; ++i) pick[i] = i;
    long visited = 0;
    while (true) {
      if (++visited > max_subsets)
        throw NumericalError("extreme ray enumeration exceeded " + std::to_string(max_subsets) +
                             " row subsets");
      Matrix active(d - 1, d);
      for (int i = 0; i < d - 1; ++i) active.row(i) = ineq_.row(pick[i]);
      Eigen::FullPivLU<Matrix> lu(active);
      lu.setThreshold(1e-10);
      if (lu.rank() == d - 1) {
        const Matrix kernel = lu.kernel();
        Vector v = kernel.col(0);
        v /= v.norm();
        const Vector av = ineq_ * v;
        const double tol = 1e-10 * row_scale;
        if (av.minCoeff() >= -tol) add_ray(v);
        else if ((-av).minCoeff() >= -tol) add_ray(-v);
      }
      int i = d - 2;
      while (i >= 0 && pick[i] == m - (d - 1) + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < d - 1; ++j) pick[j] = pick[j - 1] + 1;
    }
    return to_columns(rays, d);
  }

 private:
  static Matrix to_columns(const std::vector<Vector>& rays, int d) {
    Matrix out(d, static_cast<Eigen::Index>(rays.size()));
    for (std::size_t j = 0; j < rays.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = rays[j];
    return out;
  }

  bool detect_standard() const {
    if (ineq_.rows() != ineq_.cols()) return false;
    std::vector<bool> seen(ineq_.cols(), false);
    for (Eigen::Index i = 0; i < ineq_.rows(); ++i) {
      Eigen::Index hit = -1;
      for (Eigen::Index j = 0; j < ineq_.cols(); ++j) {
        if (ineq_(i, j) == 0.0) continue;
        if (ineq_(i, j) < 0.0 || hit != -1) return false;
        hit = j;
      }
      if (hit == -1 || seen[hit]) return false;
      seen[hit] = true;
    }
    return true;
  }

  Matrix ineq_;
  bool standard_ = false;
};

/// The cone of functionals nonnegative on `cone`, written in inequality form
/// whose rows are the extreme rays of `cone`. Requires nonempty interior.
inline PolyhedralCone dual_cone(const PolyhedralCone& cone) {
  const Matrix rays = cone.extreme_rays();
  if (rays.cols() == 0) throw DegenerateCone("cone has no extreme rays");
  Eigen::FullPivLU<Matrix> lu(rays.transpose());
  lu.setThreshold(1e-10);
  if (lu.rank() < cone.dim())
    throw DegenerateCone("dual wedge is not a cone: the cone has empty interior");
  return PolyhedralCone(rays.transpose());
}

/// Finite-dimensional ordered normed space: R^dim, a cone, and a norm.
struct OrderedSpaceSpec {
  OrderedSpaceSpec(PolyhedralCone c, NormSpec n) : cone(std::move(c)), norm(std::move(n)) {
    if (cone.dim() != norm.dim()) throw DimensionError("ordered space norm", cone.dim(), norm.dim());
  }

  static OrderedSpaceSpec standard(NormSpec n) {
    const int d = n.dim();
    return {PolyhedralCone::standard(d), std::move(n)};
  }

  int dim() const { return cone.dim(); }

  PolyhedralCone cone;
  NormSpec norm;
};

inline bool cone_contains(const PolyhedralCone& cone, const Vector& x) { return cone.contains(x); }

struct SupremumOptions {
  int directions = 64;
  double agreement = 1e-8;
  std::uint64_t seed = 0x5eed;
};

/// Least upper bound of x and y, or nullopt when the random LP directions
/// find different minimal upper bounds.
inline std::optional<Vector> supremum_oracle(const OrderedSpaceSpec& space, const Vector& x,
                                             const Vector& y, const SupremumOptions& opts = {}) {
  require_size(x, space.dim(), "supremum_oracle x");
  require_size(y, space.dim(), "supremum_oracle y");
  if (space.cone.is_standard()) return x.cwiseMax(y);
  const Matrix& A = space.cone.ineq();
  Matrix G(2 * A.rows(), A.cols());
  G << A, A;
  Vector h(2 * A.rows());
  h << A * x, A * y;
  Rng rng(opts.seed);
  std::optional<Vector> first;
  for (int t = 0; t < opts.directions; ++t) {
    // c = A^T lambda with lambda > 0 is strictly positive on the cone, so a
    // least upper bound is the unique minimizer of c.u over upper bounds.
    const Vector c = A.transpose() * rng.uniform_vector(A.rows(), 0.5, 1.5);
    const lp::Result r = lp::minimize_free(c, G, h);
    if (!r.optimal()) return std::nullopt;
    if (!first) first = r.x;
    else if ((*first - r.x).cwiseAbs().maxCoeff() > opts.agreement * std::max(1.0, max_abs(*first)))
      return std::nullopt;
  }
  return first;
}

/// Splits 0 <= w <= x + y as w1 + w2 with 0 <= w1 <= x and 0 <= w2 <= y.
inline std::pair<Vector, Vector> riesz_decompose(const Vector& x, const Vector& y, const Vector& w) {
  require_size(y, x.size(), "riesz_decompose y");
  require_size(w, x.size(), "riesz_decompose w");
  if (x.size() > 0) {
    if (x.minCoeff() < 0.0 || y.minCoeff() < 0.0)
      throw PreconditionError("riesz_decompose: x and y must be nonnegative");
    if (w.minCoeff() < 0.0 || (x + y - w).minCoeff() < -kMembershipTol)
      throw PreconditionError("riesz_decompose: need 0 <= w <= x + y");
  }
  Vector w1 = w.cwiseMin(x);
  Vector w2 = w - w1;
  return {std::move(w1), std::move(w2)};
}

/// max ||x|| / ||y|| over witnesses with 0 <= x <= y.
inline double normality_constant_lower_bound(const OrderedSpaceSpec& space,
                                             const std::vector<std::pair<Vector, Vector>>& witnesses) {
  double best = 0.0;
  for (std::size_t i = 0; i < witnesses.size(); ++i) {
    const auto& [x, y] = witnesses[i];
    if (!space.cone.contains(x) || !space.cone.less_equal(x, y))
      throw PreconditionError("normality witness " + std::to_string(i) + " violates 0 <= x <= y");
    const double ny = space.norm(y);
    if (ny == 0.0) throw PreconditionError("normality witness " + std::to_string(i) + " has y = 0");
    best = std::max(best, space.norm(x) / ny);
  }
  return best;
}

struct FaceResult {
  bool face = true;
  std::optional<std::pair<Vector, Vector>> witness;  // z <= g, g generated, z not

  explicit operator bool() const { return face; }
};

/// Whether the cone spanned by `generators` is a face of `ambient`. The order
/// interval [0, g] for g the sum of the generators is explored by LPs along
/// `sample_size` random directions; each vertex found must lie in the
/// generated cone.
inline FaceResult is_face(const std::vector<Vector>& generators, const PolyhedralCone& ambient,
                          int sample_size = 512, std::uint64_t seed = 0xface) {
  FaceResult out;
  if (generators.empty()) return out;
  const int d = ambient.dim();
  Matrix gens(d, static_cast<Eigen::Index>(generators.size()));
  for (std::size_t j = 0; j < generators.size(); ++j) {
    require_size(generators[j], d, "is_face generator");
    if (!ambient.contains(generators[j]))
      throw PreconditionError("is_face: generator " + std::to_string(j) + " lies outside the cone");
    gens.col(static_cast<Eigen::Index>(j)) = generators[j];
  }
  const Vector g = gens.rowwise().sum();
  const Matrix& A = ambient.ineq();
  Matrix G(2 * A.rows(), d);
  G << A, -A;
  Vector h(2 * A.rows());
  h << Vector::Zero(A.rows()), -(A * g);
  const double scale = std::max(1.0, max_abs(g));
  Rng rng(seed);
  for (int t = 0; t < sample_size; ++t) {
    const Vector dir = rng.direction(d);
    const lp::Result r = lp::minimize_free(-dir, G, h);
    if (!r.optimal()) continue;
    if (!lp::in_conic_hull(gens, r.x, kLpTol * scale)) {
      out.face = false;
      out.witness = std::make_pair(r.x, g);
      return out;
    }
  }
  return out;
}

/// max over samples of || |Jx| - J|x| ||_inf; passes at 1e-10.
template <class Map>
Report lattice_hom_check(const Map& J, const std::vector<Vector>& samples, double tol = 1e-10) {
  Report rep;
  for (const auto& x : samples) {
    if (x.size() != J.cols()) throw DimensionError("lattice_hom_check sample", J.cols(), x.size());
    const Vector jx = J * x;
    const Vector jabs = J * x.cwiseAbs();
    const double defect = max_abs(jx.cwiseAbs() - jabs);
    if (defect > rep.worst) {
      rep.worst = defect;
      if (defect > tol) rep.witness = x;
    }
  }
  rep.pass = rep.worst <= tol;
  if (!rep.pass) rep.detail = "|Jx| differs from J|x|";
  return rep;
}

}  // namespace latlab

#endif  // LATLAB_ORDERED_SPACE_HPP
