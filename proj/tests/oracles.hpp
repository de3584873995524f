#ifndef LATLAB_TESTS_ORACLES_HPP
#define LATLAB_TESTS_ORACLES_HPP

// Independent reference computations. Nothing here calls into the library's
// norm, operator, or optimization code.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Dense forward difference on an interval (last row one-sided) or torus.
inline Mat forward_difference(int n, double h, bool periodic) {
  Mat d = Mat::Zero(n, n);
  for (int i = 0; i < n - 1; ++i) {
    d(i, i) = -1.0 / h;
    d(i, i + 1) = 1.0 / h;
  }
  if (periodic) {
    d(n - 1, n - 1) = -1.0 / h;
    d(n - 1, 0) = 1.0 / h;
  } else {
    d(n - 1, n - 2) = -1.0 / h;
    d(n - 1, n - 1) = 1.0 / h;
  }
  return d;
}

// (h sum_{j <= k} |D^j f|^p)^{1/p} with explicit loops.
inline double sobolev_1d(const Vec& f, int k, double p, double h, bool periodic) {
  const Mat d = forward_difference(static_cast<int>(f.size()), h, periodic);
  Vec cur = f;
  double total = 0.0;
  for (int j = 0; j <= k; ++j) {
    for (int i = 0; i < cur.size(); ++i) total += h * std::pow(std::abs(cur[i]), p);
    cur = d * cur;
  }
  return std::pow(total, 1.0 / p);
}

inline Mat gram_1d(int n, int k, double h, bool periodic) {
  const Mat d = forward_difference(n, h, periodic);
  Mat g = Mat::Zero(n, n);
  Mat power = Mat::Identity(n, n);
  for (int j = 0; j <= k; ++j) {
    g += power.transpose() * power;
    power = d * power;
  }
  return g;
}

// Hand-written conjugate gradients for symmetric positive definite systems.
inline Vec conjugate_gradient(const Mat& a, const Vec& b, double tol = 1e-15, int max_iter = 100000) {
  Vec x = Vec::Zero(b.size());
  Vec r = b;
  Vec p = r;
  double rr = r.dot(r);
  const double stop = tol * tol * std::max(1.0, b.dot(b));
  for (int it = 0; it < max_iter && rr > stop; ++it) {
    const Vec ap = a * p;
    const double alpha = rr / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.dot(r);
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return x;
}

// sup <f,g>_h / ||f||_{k,2}: the maximizer solves G f = g, found by CG.
inline double dual_sobolev_1d(const Vec& g, int k, double h, bool periodic) {
  const Mat gram = gram_1d(static_cast<int>(g.size()), k, h, periodic);
  const Vec f = conjugate_gradient(gram, g);
  const double nf = std::sqrt(h * f.dot(gram * f));
  return nf > 0.0 ? h * f.dot(g) / nf : 0.0;
}

// Largest ratio over random trial functions (a lower bound for the dual norm).
inline double dual_sobolev_monte_carlo(const Vec& g, int k, double h, bool periodic, int trials,
                                       unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vec f(g.size());
    for (int i = 0; i < f.size(); ++i) f[i] = nd(gen);
    const double ratio = std::abs(h * f.dot(g)) / sobolev_1d(f, k, 2.0, h, periodic);
    best = std::max(best, ratio);
  }
  return best;
}

// Every vertex of [0, |x|] for an arbitrary norm functor.
inline double box_vertex_max(const Vec& x, const std::function<double(const Vec&)>& norm) {
  const int d = static_cast<int>(x.size());
  double best = 0.0;
  for (long mask = 0; mask < (1L << d); ++mask) {
    Vec w(d);
    for (int i = 0; i < d; ++i) w[i] = (mask >> i) & 1 ? std::abs(x[i]) : 0.0;
    best = std::max(best, norm(w));
  }
  return best;
}

// Random-perturbation search over decompositions x = y - z, y, z >= 0.
inline double span_norm_search(const Vec& x, const std::function<double(const Vec&)>& norm,
                               int trials, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vec xp = x.cwiseMax(0.0);
  const Vec xm = (-x).cwiseMax(0.0);
  double best = norm(xp) + norm(xm);
  for (int t = 0; t < trials; ++t) {
    Vec s(x.size());
    const double scale = std::pow(10.0, -3.0 * u(gen));
    for (int i = 0; i < s.size(); ++i) s[i] = scale * u(gen);
    best = std::min(best, norm(xp + s) + norm(xm + s));
  }
  return best;
}

inline Vec modulus(const Vec& z) { return z.cwiseAbs(); }

}  // namespace oracle

#endif  // LATLAB_TESTS_ORACLES_HPP
