#ifndef LATLAB_NORMS_HPP
#define LATLAB_NORMS_HPP

// Norm specifications: weighted l^p, discrete W^{k,p}, and the dual of
// discrete W^{k,q}. Every norm also provides a (sub)gradient so that the span
// norm can be minimized by projected descent.

#include "latlab/grid.hpp"
#include "latlab/optim.hpp"

#include <memory>
#include <optional>

namespace latlab {

enum class NormKind { weighted_lp, sobolev, dual_sobolev };

/// Value of a dual Sobolev norm with its duality certificate. For p = 2 the
/// value is computed from a linear solve and `lower == upper`.
struct DualNormValue {
  double lower = 0.0;
  double upper = 0.0;
  Vector maximizer;  // f with ||f||_{k,q} = 1 attaining `lower`

  double relative_gap() const { return upper > 0.0 ? (upper - lower) / upper : 0.0; }
};

class NormSpec {
 public:
  /// (sum_i w_i |x_i|^p)^(1/p). p = 1 is accepted here (and only here).
  static NormSpec lp(Vector weights, double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw PreconditionError("l^p exponent must be in [1, inf)");
    if (weights.size() == 0 || !(weights.minCoeff() > 0.0))
      throw PreconditionError("norm weights must be strictly positive");
    auto impl = std::make_shared<Impl>();
    impl->kind = NormKind::weighted_lp;
    impl->p = p;
    impl->weights = std::move(weights);
    return NormSpec(std::move(impl));
  }

  static NormSpec lp(int dim, double p) { return lp(Vector::Ones(dim), p); }

  /// l^p with the grid quadrature weight on every node.
  static NormSpec grid_lp(const GridDomain& domain, double p) {
    return lp(Vector::Constant(domain.size(), domain.cell_volume()), p);
  }

  static NormSpec sobolev(const GridDomain& domain, int k, double p) {
    return NormSpec(make_sobolev(domain, k, p, NormKind::sobolev));
  }

  /// Dual of discrete W^{k,q}, 1/p + 1/q = 1, under <f,g>_h = h^d sum f_i g_i.
  static NormSpec dual_sobolev(const GridDomain& domain, int k, double p) {
    if (k < 1) throw PreconditionError("dual Sobolev order must be >= 1");
    auto impl = make_sobolev(domain, k, p, NormKind::dual_sobolev);
    if (p == 2.0) {
      Operator gram(domain.size(), domain.size());
      for (const auto& d : impl->derivatives) gram += Operator(d.transpose() * d);
      impl->gram = std::make_shared<Eigen::SimplicialLDLT<Operator>>(gram);
      if (impl->gram->info() != Eigen::Success)
        throw NumericalError("dual Sobolev norm: Gram factorization failed");
    }
    return NormSpec(std::move(impl));
  }

  NormKind kind() const { return impl_->kind; }
  int order() const { return impl_->k; }
  double exponent() const { return impl_->p; }
  const Vector& weights() const { return impl_->weights; }
  int dim() const { return static_cast<int>(impl_->weights.size()); }
  const std::optional<GridDomain>& grid() const { return impl_->grid; }

  /// Whether |x| <= |y| implies ||x|| <= ||y|| (true for weighted l^p only).
  bool monotone() const { return kind() == NormKind::weighted_lp; }

  double operator()(const Vector& x) const {
    require_size(x, dim(), "norm evaluation");
    switch (kind()) {
      case NormKind::weighted_lp: return weighted_lp(x);
      case NormKind::sobolev: return sobolev_value(x);
      case NormKind::dual_sobolev: return dual(x).lower;
    }
    return 0.0;
  }

  /// A gradient of the norm at x (zero at x = 0, where the norm has a kink).
  Vector gradient(const Vector& x) const {
    require_size(x, dim(), "norm gradient");
    switch (kind()) {
      case NormKind::weighted_lp: {
        const double value = weighted_lp(x);
        if (value == 0.0) return Vector::Zero(x.size());
        const double p = impl_->p;
        Vector g = impl_->weights.cwiseProduct(signed_power(x, p - 1.0));
        return g * std::pow(value, 1.0 - p);
      }
      case NormKind::sobolev: {
        const double value = sobolev_value(x);
        if (value == 0.0) return Vector::Zero(x.size());
        const double p = impl_->p;
        Vector g = Vector::Zero(x.size());
        for (const auto& d : impl_->derivatives) g += d.transpose() * signed_power(d * x, p - 1.0);
        return g * (impl_->weights[0] * std::pow(value, 1.0 - p));
      }
      case NormKind::dual_sobolev: {
        // Danskin: the gradient of a support function is its maximizer.
        DualNormValue v = dual(x);
        if (v.lower == 0.0) return Vector::Zero(x.size());
        return impl_->weights[0] * v.maximizer;
      }
    }
    return Vector::Zero(x.size());
  }

  /// Dual Sobolev value with certificate (throws for the other kinds).
  DualNormValue dual(const Vector& g) const {
    if (kind() != NormKind::dual_sobolev) throw PreconditionError("not a dual Sobolev norm");
    require_size(g, dim(), "dual Sobolev norm");
    return impl_->p == 2.0 ? dual_hilbert(g) : dual_by_ascent(g);
  }

 private:
  struct Impl {
    NormKind kind = NormKind::weighted_lp;
    int k = 0;
    double p = 2.0;
    Vector weights;
    std::optional<GridDomain> grid;
    std::vector<Operator> derivatives;
    std::shared_ptr<Eigen::SimplicialLDLT<Operator>> gram;
  };

  explicit NormSpec(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  static std::shared_ptr<Impl> make_sobolev(const GridDomain& domain, int k, double p,
                                            NormKind kind) {
    if (!(p > 1.0) || !std::isfinite(p))
      throw PreconditionError("Sobolev exponent must lie strictly between 1 and infinity");
    auto impl = std::make_shared<Impl>();
    impl->kind = kind;
    impl->k = k;
    impl->p = p;
    impl->weights = Vector::Constant(domain.size(), domain.cell_volume());
    impl->grid = domain;
    impl->derivatives = derivative_operators(domain, k);
    return impl;
  }

  static Vector signed_power(const Vector& v, double e) {
    if (e == 0.0) return v.unaryExpr([](double t) { return double((t > 0) - (t < 0)); });
    return v.unaryExpr([e](double t) { return t == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(t), e), t); });
  }

  double weighted_lp(const Vector& x) const {
    const double p = impl_->p;
    if (p == 1.0) return impl_->weights.dot(x.cwiseAbs());
    if (p == 2.0) return std::sqrt(impl_->weights.dot(x.cwiseAbs2()));
    return std::pow(impl_->weights.dot(Vector(x.cwiseAbs().array().pow(p))), 1.0 / p);
  }

  double sobolev_sum(const Vector& x, double p) const {
    double total = 0.0;
    for (const auto& d : impl_->derivatives) {
      const Vector dx = d * x;
      total += p == 2.0 ? dx.squaredNorm() : dx.cwiseAbs().array().pow(p).sum();
    }
    return impl_->weights[0] * total;
  }

  double sobolev_value(const Vector& x) const {
    return std::pow(sobolev_sum(x, impl_->p), 1.0 / impl_->p);
  }

  DualNormValue dual_hilbert(const Vector& g) const {
    DualNormValue out;
    const double w = impl_->weights[0];
    const Vector u = impl_->gram->solve(g);
    const double value = std::sqrt(std::max(0.0, w * u.dot(g)));
    out.lower = out.upper = value;
    out.maximizer = value > 0.0 ? Vector(u / value) : Vector::Zero(g.size());
    return out;
  }

  // Maximize <f,g>_h over ||f||_{k,q} <= 1 by minimizing the smooth convex
  // potential (1/q) ||f||_{k,q}^q - <f,g>_h; its minimizer satisfies
  // sum_a D_a^T phi_q(D_a f) = g, which also yields the dual certificate.
  DualNormValue dual_by_ascent(const Vector& g) const {
    DualNormValue out;
    out.maximizer = Vector::Zero(g.size());
    if (max_abs(g) == 0.0) return out;
    const double p = impl_->p;
    const double q = p / (p - 1.0);
    const auto& ds = impl_->derivatives;
    auto potential = [&](const Vector& f) { return sobolev_sum(f, q) / (impl_->weights[0] * q) - f.dot(g); };
    auto gradient = [&](const Vector& f) {
      Vector out_g = -g;
      for (const auto& d : ds) out_g += d.transpose() * signed_power(d * f, q - 1.0);
      return out_g;
    };
    optim::SpgOptions opts;
    opts.max_iterations = 100000;
    opts.tolerance = 1e-13;
    const optim::SpgResult r = optim::spg_minimize(potential, gradient, optim::project_identity,
                                                   Vector::Zero(g.size()), opts);
    const double w = impl_->weights[0];
    const double nf = std::pow(sobolev_sum(r.x, q), 1.0 / q);
    out.lower = nf > 0.0 ? w * r.x.dot(g) / nf : 0.0;
    out.maximizer = nf > 0.0 ? Vector(r.x / nf) : Vector::Zero(g.size());
    // Any family (v_a) with sum_a D_a^T v_a = g certifies an upper bound.
    Vector v0 = g;
    double upper_sum = 0.0;
    for (std::size_t a = 1; a < ds.size(); ++a) {
      const Vector va = signed_power(ds[a] * r.x, q - 1.0);
      v0 -= ds[a].transpose() * va;
      upper_sum += va.cwiseAbs().array().pow(p).sum();
    }
    upper_sum += v0.cwiseAbs().array().pow(p).sum();
    out.upper = std::pow(w * upper_sum, 1.0 / p);
    if (out.relative_gap() > 1e-4)
      throw ConvergenceError("dual Sobolev ascent: duality gap above 1e-4", out.lower,
                             {out.lower, out.upper, double(r.iterations)});
    return out;
  }

  std::shared_ptr<const Impl> impl_;
};

}  // namespace latlab

#endif  // LATLAB_NORMS_HPP
