#ifndef LATLAB_CORE_HPP
#define LATLAB_CORE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace latlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Operator = Eigen::SparseMatrix<double>;

/// Absolute tolerance for cone membership tests.
inline constexpr double kMembershipTol = 1e-10;
/// Feasibility tolerance used by every linear program.
inline constexpr double kLpTol = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, Eigen::Index expected, Eigen::Index got)
      : Error(what + ": expected dimension " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Cone that fails pointedness, or whose dual wedge is not a cone.
class DegenerateCone : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of budget. Carries the best value reached and
/// whatever per-iteration diagnostics the caller recorded.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best, std::vector<double> trace = {})
      : Error(what), best_value(best), diagnostics(std::move(trace)) {}

  double best_value;
  std::vector<double> diagnostics;
};

inline void require_size(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) throw DimensionError(what, n, v.size());
}

/// The one seedable generator used for every randomized routine. Floating
/// draws are built from raw 64-bit words so sequences are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int index(int n) { return static_cast<int>(bits() % static_cast<std::uint64_t>(n)); }

  Vector uniform_vector(Eigen::Index n, double lo, double hi) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  /// Point on the unit sphere (Gaussian direction via Box-Muller).
  Vector direction(Eigen::Index n) {
    Vector v(n);
    do {
      for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    } while (v.norm() == 0.0);
    return v / v.norm();
  }

  double normal() {
    constexpr double two_pi = 6.283185307179586476925;
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

/// Outcome of a verification routine: the worst violation found and, when it
/// failed, the offending input.
struct Report {
  bool pass = true;
  double worst = 0.0;
  std::string detail;
  Vector witness;
};

inline Vector positive_part(const Vector& x) { return x.cwiseMax(0.0); }
inline Vector negative_part(const Vector& x) { return (-x).cwiseMax(0.0); }

inline double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/// True when every stored entry is >= -tol * max(1, largest magnitude).
inline bool entrywise_nonnegative(const Operator& op, double tol = 1e-12) {
  double scale = 1.0;
  for (int k = 0; k < op.outerSize(); ++k)
    for (Operator::InnerIterator it(op, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  for (int k = 0; k < op.outerSize(); ++k)
    for (Operator::InnerIterator it(op, k); it; ++it)
      if (it.value() < -tol * scale) return false;
  return true;
}

inline bool entrywise_nonnegative(const Matrix& m, double tol = 1e-12) {
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return m.minCoeff() >= -tol * scale;
}

}  // namespace latlab

#endif  // LATLAB_CORE_HPP
