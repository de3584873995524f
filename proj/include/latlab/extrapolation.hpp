#ifndef LATLAB_EXTRAPOLATION_HPP
#define LATLAB_EXTRAPOLATION_HPP

// Extrapolation norms ||x||_{-1} = ||(lambda - A)^{-1} x|| for matrix
// generators with positive resolvents.

#include "latlab/span_lattice.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace latlab {

/// A square generator with lambda0 above its spectral bound and a resolvent
/// positivity certificate.
class GeneratorMatrix {
 public:
  static constexpr double kDefaultMargin = 1e-3;

  explicit GeneratorMatrix(Matrix A, double margin = kDefaultMargin) : A_(std::move(A)) {
    if (A_.rows() != A_.cols() || A_.rows() == 0)
      throw DimensionError("generator must be square", A_.rows(), A_.cols());
    if (!(margin > 0.0)) throw PreconditionError("spectral margin must be positive");
    Eigen::EigenSolver<Matrix> es(A_, false);
    if (es.info() != Eigen::Success) throw NumericalError("generator eigenvalues did not converge");
    spectral_bound_ = es.eigenvalues().real().maxCoeff();
    lambda0_ = spectral_bound_ + margin;
    certify();
  }

  const Matrix& matrix() const { return A_; }
  int dim() const { return static_cast<int>(A_.rows()); }
  double spectral_bound() const { return spectral_bound_; }
  double lambda0() const { return lambda0_; }
  bool metzler() const { return metzler_; }
  bool certified() const { return certified_; }
  double certificate_min_entry() const { return certificate_min_; }

  /// The two points at which the certificate samples the resolvent. The
  /// second is 2 lambda0 + 1 unless that falls below lambda0.
  std::pair<double, double> certificate_points() const {
    return {lambda0_, std::max(2.0 * lambda0_ + 1.0, lambda0_ + 1.0)};
  }

  /// (mu - A)^{-1}; requires mu > lambda0 and checks positivity when certified.
  Matrix resolvent(double mu) const {
    if (!(mu > lambda0_))
      throw PreconditionError("resolvent point " + std::to_string(mu) + " must exceed lambda0 = " +
                              std::to_string(lambda0_));
    Matrix r = raw_resolvent(mu);
    if (certified_ && !entrywise_nonnegative(r))
      throw NumericalError("certified generator produced a non-positive resolvent");
    return r;
  }

  /// e^{tA}.
  Matrix semigroup(double t) const { return Matrix((t * A_).exp()); }

 private:
  Matrix raw_resolvent(double mu) const {
    const Matrix shifted = mu * Matrix::Identity(dim(), dim()) - A_;
    Eigen::FullPivLU<Matrix> lu(shifted);
    if (!lu.isInvertible()) throw NumericalError("mu - A is singular");
    return lu.inverse();
  }

  void certify() {
    metzler_ = true;
    for (int i = 0; i < dim(); ++i)
      for (int j = 0; j < dim(); ++j)
        if (i != j && A_(i, j) < 0.0) metzler_ = false;
    const auto [mu1, mu2] = certificate_points();
    certificate_min_ = std::min(raw_resolvent(mu1).minCoeff(), raw_resolvent(mu2).minCoeff());
    certified_ = metzler_ && certificate_min_ >= -1e-12;
  }

  Matrix A_;
  double spectral_bound_ = 0.0;
  double lambda0_ = 0.0;
  bool metzler_ = false;
  bool certified_ = false;
  double certificate_min_ = 0.0;
};

inline Matrix resolvent(const GeneratorMatrix& gen, double mu) { return gen.resolvent(mu); }

/// Second differences with reflecting ends: rows (-1, 1), (1, -2, 1), (1, -1)
/// scaled by 1/h^2.
inline GeneratorMatrix neumann_laplacian_1d(int n, double h) {
  if (n < 3) throw PreconditionError("Neumann Laplacian needs n >= 3");
  if (!(h > 0.0)) throw PreconditionError("grid spacing must be positive");
  Matrix A = Matrix::Zero(n, n);
  const double s = 1.0 / (h * h);
  for (int i = 0; i < n; ++i) {
    if (i > 0) A(i, i - 1) = s, A(i, i) -= s;
    if (i < n - 1) A(i, i + 1) = s, A(i, i) -= s;
  }
  return GeneratorMatrix(std::move(A));
}

/// A = -diag(m) for m >= 0.
inline GeneratorMatrix multiplication_generator(const Vector& m) {
  if (m.size() == 0 || m.minCoeff() < 0.0) throw PreconditionError("multiplier must be nonnegative");
  return GeneratorMatrix(Matrix((-m).asDiagonal()));
}

/// R^d with the norm ||(lambda - A)^{-1} x||_X and the closure of the
/// standard cone in that norm.
class ExtrapolationSpace {
 public:
  ExtrapolationSpace(NormSpec base, GeneratorMatrix gen, std::optional<double> lambda = std::nullopt)
      : base_(std::move(base)), gen_(std::move(gen)) {
    if (base_.kind() != NormKind::weighted_lp)
      throw PreconditionError("extrapolation base norm must be a weighted l^p norm");
    if (base_.dim() != gen_.dim()) throw DimensionError("extrapolation base norm", gen_.dim(), base_.dim());
    lambda_ = lambda.value_or(gen_.lambda0() + 1.0);
    resolvent_ = gen_.resolvent(lambda_);
  }

  const NormSpec& base() const { return base_; }
  const GeneratorMatrix& generator() const { return gen_; }
  double lambda() const { return lambda_; }
  const Matrix& resolvent() const { return resolvent_; }

  double norm(const Vector& x) const {
    require_size(x, gen_.dim(), "extrapolation norm");
    return base_(resolvent_ * x);
  }

  /// min over y >= 0 of ||x - y||_{-1}, by projected descent from y = x+.
  double cone_distance(const Vector& x) const {
    require_size(x, gen_.dim(), "cone distance");
    const double p = base_.exponent();
    auto f = [&](const Vector& y) {
      const Vector r = resolvent_ * (x - y);
      return base_.weights().dot(Vector(r.cwiseAbs().array().pow(p))) / p;
    };
    auto grad = [&](const Vector& y) {
      const Vector r = resolvent_ * (x - y);
      const Vector g = base_.weights().cwiseProduct(
          r.unaryExpr([p](double t) { return t == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(t), p - 1.0), t); }));
      return Vector(-(resolvent_.transpose() * g));
    };
    optim::SpgOptions opts;
    opts.max_iterations = 20000;
    const optim::SpgResult r = optim::spg_minimize(f, grad, optim::project_nonnegative, positive_part(x), opts);
    return norm(x - r.x);
  }

  /// Membership in the closure of X_+ under ||.||_{-1}: distance zero up to
  /// `tol` relative to ||x||_{-1}.
  bool cone_contains(const Vector& x, double tol = 1e-10) const {
    const double nx = norm(x);
    if (nx == 0.0) return true;
    return cone_distance(x) <= tol * nx;
  }

 private:
  NormSpec base_;
  GeneratorMatrix gen_;
  double lambda_ = 0.0;
  Matrix resolvent_;
};

inline double extrapolation_norm(const ExtrapolationSpace& space, const Vector& x) { return space.norm(x); }

namespace detail {

// Riesz-Thorin bound for the operator norm of T on weighted l^p.
inline double weighted_lp_operator_bound(const Matrix& T, const Vector& w, double p) {
  const Vector up = w.array().pow(1.0 / p);
  const Matrix Tw = up.asDiagonal() * T * up.cwiseInverse().asDiagonal();
  const double n1 = Tw.cwiseAbs().colwise().sum().maxCoeff();
  const double ninf = Tw.cwiseAbs().rowwise().sum().maxCoeff();
  return std::pow(n1, 1.0 / p) * std::pow(ninf, 1.0 - 1.0 / p);
}

}  // namespace detail

/// ||x||_{lambda1} / ||x||_{lambda2} lies in [1/lower_factor, upper_factor]:
/// (lambda1 - A)^{-1} = (I + (lambda2 - lambda1)(lambda1 - A)^{-1})(lambda2 - A)^{-1}.
struct LambdaEquivalence {
  double upper_factor = 1.0;
  double lower_factor = 1.0;
  double rho() const { return std::max(upper_factor, lower_factor); }
};

inline LambdaEquivalence lambda_equivalence_bound(const GeneratorMatrix& gen, const NormSpec& base,
                                                  double lambda1, double lambda2) {
  const Matrix r1 = gen.resolvent(lambda1);
  const Matrix r2 = gen.resolvent(lambda2);
  const Matrix I = Matrix::Identity(gen.dim(), gen.dim());
  LambdaEquivalence out;
  out.upper_factor =
      detail::weighted_lp_operator_bound(I + (lambda2 - lambda1) * r1, base.weights(), base.exponent());
  out.lower_factor =
      detail::weighted_lp_operator_bound(I + (lambda1 - lambda2) * r2, base.weights(), base.exponent());
  return out;
}

/// J = id and R_n = n (n - A)^{-1} for powers of two n above lambda0.
inline ApproximationScheme resolvent_scheme(const GeneratorMatrix& gen, long n_max = 1L << 52) {
  ApproximationScheme s;
  s.J = detail::identity(gen.dim());
  long n = 2;
  while (static_cast<double>(n) <= gen.lambda0()) n *= 2;
  s.n_min = n;
  s.n_max = n_max;
  s.R = [gen](long k) {
    const double nd = static_cast<double>(k);
    return Operator((nd * gen.resolvent(nd)).sparseView());
  };
  return s;
}

/// Supremum of +z and -z in X_{-1} built from J|R_n z| with the resolvent scheme.
inline SupResult resolvent_sup(const ExtrapolationSpace& space, const Vector& z, double tol) {
  return constructive_sup(resolvent_scheme(space.generator()), z, tol);
}

inline Report multiplication_example_check(const Vector& m, double p, const Vector& mu_weights,
                                           int trials = 100, std::uint64_t seed = 0x4e3) {
  require_size(mu_weights, m.size(), "multiplication example weights");
  const ExtrapolationSpace space(NormSpec::lp(mu_weights, p), multiplication_generator(m), 1.0);
  const Vector nu = mu_weights.cwiseProduct(Vector((1.0 + m.array()).pow(-p)));
  const NormSpec weighted = NormSpec::lp(nu, p);
  Rng rng(seed);
  Report rep;
  for (int t = 0; t < trials; ++t) {
    const Vector x = rng.uniform_vector(m.size(), -1.0, 1.0);
    const double lhs = space.norm(x);
    const double rhs = weighted(x);
    const double gap = std::abs(lhs - rhs) / std::max(1.0, rhs);
    if (gap > rep.worst) rep.worst = gap;
    if (gap > 1e-12 && rep.pass) {
      rep.pass = false;
      rep.detail = "||x||_{-1} differs from the weighted p-norm";
      rep.witness = x;
    }
    // cone statement on x and on |x|
    for (const Vector& v : {x, Vector(x.cwiseAbs())}) {
      if (space.cone_contains(v) != (v.minCoeff() >= 0.0) && rep.pass) {
        rep.pass = false;
        rep.detail = "cone membership differs from componentwise nonnegativity";
        rep.witness = v;
      }
    }
  }
  for (double time : {0.1, 1.0, 10.0}) {
    if (space.generator().semigroup(time).minCoeff() < 0.0 && rep.pass) {
      rep.pass = false;
      rep.detail = "semigroup lost positivity";
    }
  }
  return rep;
}

}  // namespace latlab

#endif  // LATLAB_EXTRAPOLATION_HPP
