#ifndef LATLAB_SPAN_LATTICE_HPP
#define LATLAB_SPAN_LATTICE_HPP

// Span norm, the lattice renorm sup{||w|| : 0 <= w <= |x|} with its
// equivalence bounds, and supremum constructions s = lim J|R_n z|.

#include "latlab/ordered_space.hpp"

#include <functional>

namespace latlab {

struct SpanNormResult {
  double value = 0.0;
  Vector y;  // x = y - z with y, z >= 0
  Vector z;
  int start = 0;  // index of the winning start
};

struct SpanNormOptions {
  int starts = 8;
  int max_iterations = 20000;
  // value-stagnation stop for ill-conditioned norms (W^{2,p} Gram matrices)
  int stall_window = 500;
  double stall_tolerance = 1e-11;
  std::uint64_t seed = 0x59a2;
};

/// inf{||y|| + ||z|| : y, z >= 0, x = y - z} over y = x+ + s, z = x- + s.
inline SpanNormResult span_norm(const OrderedSpaceSpec& space, const Vector& x,
                                const SpanNormOptions& opts = {}) {
  require_size(x, space.dim(), "span_norm");
  if (!space.cone.is_standard()) throw PreconditionError("span_norm needs the standard cone");
  const int d = space.dim();
  const Vector xp = positive_part(x);
  const Vector xm = negative_part(x);
  SpanNormResult best;
  if (max_abs(x) == 0.0) {
    best.y = best.z = Vector::Zero(d);
    return best;
  }
  const NormSpec& norm = space.norm;
  auto f = [&](const Vector& s) { return norm(xp + s) + norm(xm + s); };
  auto grad = [&](const Vector& s) { return Vector(norm.gradient(xp + s) + norm.gradient(xm + s)); };
  optim::SpgOptions so;
  so.max_iterations = opts.max_iterations;
  so.stall_window = opts.stall_window;
  so.stall_tolerance = opts.stall_tolerance;
  Rng rng(opts.seed);
  const double top = max_abs(x);
  bool have = false;
  bool best_converged = false;
  for (int k = 0; k < opts.starts; ++k) {
    Vector s0 = k == 0 ? Vector::Zero(d) : rng.uniform_vector(d, 0.0, top);
    const optim::SpgResult r = optim::spg_minimize(f, grad, optim::project_nonnegative, s0, so);
    const Vector y = xp + r.x;
    const Vector z = xm + r.x;
    const double value = norm(y) + norm(z);
    if (!have || value < best.value) {
      have = true;
      best.value = value;
      best.y = y;
      best.z = z;
      best.start = k;
      best_converged = r.converged;
    }
  }
  if (!best_converged)
    throw ConvergenceError("span_norm: projected descent did not converge", best.value);
  return best;
}

/// max (||y|| + ||z||) / ||x|| over samples, with (y, z) from span_norm.
inline double decomposition_constant_estimate(const OrderedSpaceSpec& space,
                                              const std::vector<Vector>& samples) {
  double best = 0.0;
  for (const auto& x : samples) {
    require_size(x, space.dim(), "decomposition_constant_estimate");
    const double nx = space.norm(x);
    if (nx == 0.0) continue;
    best = std::max(best, span_norm(space, x).value / nx);
  }
  return best;
}

struct RenormValue {
  double value = 0.0;
  bool exact = true;  // false: a lower bound from local search
  Vector maximizer;   // the vertex w of [0, |x|] attaining `value`
};

inline constexpr int kRenormExactMaxDim = 16;

/// sup{||w|| : 0 <= w <= |x|}. The norm is convex, so the supremum sits at a
/// vertex |x| * 1_S of the box; vertices are enumerated up to dimension 16.
inline RenormValue renorm_value(const OrderedSpaceSpec& space, const Vector& x,
                                std::uint64_t seed = 0x4e4f) {
  require_size(x, space.dim(), "renorm_value");
  if (!space.cone.is_standard()) throw PreconditionError("renorm_value needs the standard cone");
  const int d = space.dim();
  const Vector ax = x.cwiseAbs();
  RenormValue out;
  out.maximizer = Vector::Zero(d);
  if (max_abs(x) == 0.0) return out;
  if (space.norm.monotone()) {
    out.value = space.norm(ax);
    out.maximizer = ax;
    return out;
  }
  if (d <= kRenormExactMaxDim) {
    Vector w = Vector::Zero(d);
    for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
      for (int i = 0; i < d; ++i) w[i] = (mask >> i) & 1u ? ax[i] : 0.0;
      const double v = space.norm(w);
      if (v > out.value) {
        out.value = v;
        out.maximizer = w;
      }
    }
    return out;
  }
  out.exact = false;
  Rng rng(seed);
  for (int start = 0; start < 8; ++start) {
    Vector w = ax;
    if (start > 0)
      for (int i = 0; i < d; ++i) w[i] = rng.uniform() < 0.5 ? ax[i] : 0.0;
    double v = space.norm(w);
    for (bool improved = true; improved;) {
      improved = false;
      for (int i = 0; i < d; ++i) {
        const double keep = w[i];
        w[i] = keep == 0.0 ? ax[i] : 0.0;
        const double trial = space.norm(w);
        if (trial > v) {
          v = trial;
          improved = true;
        } else {
          w[i] = keep;
        }
      }
    }
    if (v > out.value) {
      out.value = v;
      out.maximizer = w;
    }
  }
  return out;
}

/// ||x|| <= 2M |||x||| and |||x||| <= 2M^2C ||x||; `worst` is the largest
/// relative excess (<= 0 on PASS).
inline Report renorm_bounds_check(const OrderedSpaceSpec& space, const Vector& x, double M, double C) {
  Report rep;
  const double nx = space.norm(x);
  const double rx = renorm_value(space, x).value;
  const double slack = 1e-12 * std::max(1.0, std::max(nx, rx));
  const double excess_lower = nx - 2.0 * M * rx;
  const double excess_upper = rx - 2.0 * M * M * C * nx;
  rep.worst = std::max(excess_lower, excess_upper);
  rep.pass = excess_lower <= slack && excess_upper <= slack;
  if (!rep.pass) {
    rep.detail = excess_lower > slack ? "||x|| > 2M|||x|||" : "|||x||| > 2M^2C||x||";
    rep.witness = x;
  }
  return rep;
}

/// Normality witnesses built from samples: (x+, |x|), (x-, |x|), (|x|, |x|),
/// (w, |x|) and (w, y + z) for the renorm maximizer w and the span-norm
/// decomposition x = y - z, plus (x+, y) and (x-, z) when y, z are nonzero.
inline std::vector<std::pair<Vector, Vector>> sample_witnesses(const OrderedSpaceSpec& space,
                                                                const std::vector<Vector>& samples) {
  std::vector<std::pair<Vector, Vector>> out;
  for (const auto& x : samples) {
    if (max_abs(x) == 0.0) continue;
    const Vector ax = x.cwiseAbs();
    const SpanNormResult s = span_norm(space, x);
    const Vector w = renorm_value(space, x).maximizer;
    out.emplace_back(positive_part(x), ax);
    out.emplace_back(negative_part(x), ax);
    out.emplace_back(ax, ax);
    out.emplace_back(w, ax);
    out.emplace_back(w, s.y + s.z);
    // a zero half of the split carries no ratio information
    if (max_abs(s.y) > 0.0) out.emplace_back(positive_part(x), s.y);
    if (max_abs(s.z) > 0.0) out.emplace_back(negative_part(x), s.z);
  }
  return out;
}

/// An embedding J (domain -> codomain) and a family R_n (codomain -> domain)
/// with J R_n -> id, sampled along n = n_min, 2 n_min, 4 n_min, ... <= n_max.
struct ApproximationScheme {
  Operator J;
  std::function<Operator(long)> R;
  long n_min = 2;
  long n_max = 1024;

  std::vector<long> schedule() const {
    if (n_min < 1 || n_max < n_min) throw PreconditionError("scheme index range is empty");
    std::vector<long> out;
    for (long n = n_min; n <= n_max; n *= 2) {
      out.push_back(n);
      if (n > n_max / 2) break;
    }
    return out;
  }

  /// Positivity of J and every scheduled R_n, and ||J R_n z - z|| non-increasing
  /// along the schedule and finally below `tol` for each validation vector.
  Report validate(const std::vector<Vector>& samples, double tol) const {
    Report rep;
    if (!entrywise_nonnegative(J)) {
      rep.pass = false;
      rep.detail = "J is not positive";
      return rep;
    }
    std::vector<std::vector<double>> errors(samples.size());
    for (long n : schedule()) {
      const Operator rn = R(n);
      if (!entrywise_nonnegative(rn)) {
        rep.pass = false;
        rep.detail = "R_" + std::to_string(n) + " is not positive";
        return rep;
      }
      for (std::size_t i = 0; i < samples.size(); ++i)
        errors[i].push_back(max_abs(J * (rn * samples[i]) - samples[i]));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& e = errors[i];
      for (std::size_t j = 1; j < e.size(); ++j)
        if (e[j] > e[j - 1] * (1.0 + 1e-9) + 1e-14) {
          rep.pass = false;
          rep.detail = "approximation error increased at step " + std::to_string(j);
          rep.witness = samples[i];
        }
      rep.worst = std::max(rep.worst, e.back());
    }
    if (rep.pass && rep.worst > tol) {
      rep.pass = false;
      rep.detail = "approximation error stays above tolerance";
    }
    return rep;
  }
};

struct SupResult {
  Vector s;
  long index = 0;                  // n at which the Cauchy window closed
  std::vector<double> increments;  // ||s_n - s_prev||_inf along the schedule
};

inline constexpr int kCauchyWindow = 3;

namespace detail {

template <class Step>
SupResult cauchy_limit(const std::vector<long>& schedule, Step&& step, double tol, const char* what) {
  SupResult out;
  Vector prev;
  int quiet = 0;
  for (long n : schedule) {
    Vector s = step(n);
    if (prev.size() > 0) {
      const double inc = max_abs(s - prev);
      out.increments.push_back(inc);
      quiet = inc <= tol ? quiet + 1 : 0;
    }
    prev = std::move(s);
    if (quiet >= kCauchyWindow) {
      out.s = std::move(prev);
      out.index = n;
      return out;
    }
  }
  const double last = out.increments.empty() ? std::numeric_limits<double>::infinity()
                                             : out.increments.back();
  throw ConvergenceError(std::string(what) + ": no convergence within the index range", last,
                         out.increments);
}

inline void verify_upper_bound(const Vector& s, const Vector& z, double tol, const char* what) {
  if ((s - z).minCoeff() < -tol || (s + z).minCoeff() < -tol)
    throw NumericalError(std::string(what) + ": limit is not an upper bound of +z and -z");
}

}  // namespace detail

/// s = lim J|R_n z| with norm-Cauchy detection (3 increments <= tol).
inline SupResult constructive_sup(const ApproximationScheme& scheme, const Vector& z, double tol) {
  require_size(z, scheme.J.rows(), "constructive_sup");
  if (max_abs(z) == 0.0) return {Vector::Zero(z.size()), scheme.n_min, {}};
  SupResult out = detail::cauchy_limit(
      scheme.schedule(), [&](long n) { return Vector(scheme.J * Vector((scheme.R(n) * z).cwiseAbs())); },
      tol, "constructive_sup");
  detail::verify_upper_bound(out.s, z, tol, "constructive_sup");
  return out;
}

/// s' = lim J'|R_n' x'| on covectors.
inline SupResult constructive_sup_dual(const ApproximationScheme& scheme, const Vector& x_dual,
                                       double tol) {
  require_size(x_dual, scheme.J.cols(), "constructive_sup_dual");
  if (max_abs(x_dual) == 0.0) return {Vector::Zero(x_dual.size()), scheme.n_min, {}};
  const Operator jt = scheme.J.transpose();
  SupResult out = detail::cauchy_limit(
      scheme.schedule(),
      [&](long n) {
        const Operator rt = scheme.R(n).transpose();
        return Vector(jt * Vector((rt * x_dual).cwiseAbs()));
      },
      tol, "constructive_sup_dual");
  detail::verify_upper_bound(out.s, x_dual, tol, "constructive_sup_dual");
  return out;
}

/// On the cone the span norm equals the norm: checks span_norm(limit - x_j)
/// against ||limit - x_j|| for an increasing chain.
inline Report cone_norm_coincidence_check(const OrderedSpaceSpec& space,
                                          const std::vector<Vector>& chain, const Vector& limit,
                                          double tol = 1e-7) {
  for (std::size_t j = 1; j < chain.size(); ++j)
    if (!space.cone.less_equal(chain[j - 1], chain[j]))
      throw PreconditionError("chain is not increasing at index " + std::to_string(j));
  Report rep;
  for (const auto& xj : chain) {
    const Vector diff = limit - xj;
    if (!space.cone.contains(diff)) {
      rep.pass = false;
      rep.detail = "limit does not dominate the chain";
      rep.witness = xj;
      return rep;
    }
    const double gap = std::abs(span_norm(space, diff).value - space.norm(diff));
    if (gap > rep.worst) rep.worst = gap;
    if (gap > tol) {
      rep.pass = false;
      rep.detail = "span norm differs from the norm on a positive difference";
      rep.witness = xj;
    }
  }
  return rep;
}

}  // namespace latlab

#endif  // LATLAB_SPAN_LATTICE_HPP
