#ifndef LATLAB_LP_HPP
#define LATLAB_LP_HPP

// Dense two-phase simplex for the small linear programs behind cone
// membership, supremum search and face detection. Bland's rule is used for
// both the entering and the leaving variable, so degenerate cone LPs cannot
// cycle.

#include "latlab/core.hpp"

#include <limits>

namespace latlab::lp {

enum class Status { optimal, infeasible, unbounded };

struct Result {
  Status status = Status::infeasible;
  double value = 0.0;
  Vector x;

  bool optimal() const { return status == Status::optimal; }
};

namespace detail {

class Tableau {
 public:
  Tableau(const Matrix& A, const Vector& b, const Vector& c, double eps)
      : m_(static_cast<int>(A.rows())),
        n_(static_cast<int>(A.cols())),
        eps_(eps),
        d_(Matrix::Zero(m_ + 2, n_ + 2)),
        basic_(m_),
        nonbasic_(n_ + 1) {
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) d_(i, j) = A(i, j);
      basic_[i] = n_ + i;
      d_(i, n_) = -1.0;
      d_(i, n_ + 1) = b[i];
    }
    for (int j = 0; j < n_; ++j) {
      nonbasic_[j] = j;
      d_(m_, j) = -c[j];
    }
    nonbasic_[n_] = -1;  // artificial variable
    d_(m_ + 1, n_) = 1.0;
  }

  Result solve() {
    Result out;
    int r = 0;
    for (int i = 1; i < m_; ++i)
      if (d_(i, n_ + 1) < d_(r, n_ + 1)) r = i;
    if (m_ > 0 && d_(r, n_ + 1) < -eps_) {
      pivot(r, n_);
      if (!run(2) || d_(m_ + 1, n_ + 1) < -eps_) {
        out.status = Status::infeasible;
        return out;
      }
      for (int i = 0; i < m_; ++i) {
        if (basic_[i] != -1) continue;
        int s = -1;
        for (int j = 0; j < n_ + 1; ++j)
          if (nonbasic_[j] != -1 && (s == -1 || std::abs(d_(i, j)) > std::abs(d_(i, s)))) s = j;
        pivot(i, s);
      }
    }
    const bool bounded = run(1);
    out.x = Vector::Zero(n_);
    for (int i = 0; i < m_; ++i)
      if (basic_[i] >= 0 && basic_[i] < n_) out.x[basic_[i]] = d_(i, n_ + 1);
    out.status = bounded ? Status::optimal : Status::unbounded;
    out.value = bounded ? d_(m_, n_ + 1) : std::numeric_limits<double>::infinity();
    return out;
  }

 private:
  void pivot(int r, int s) {
    const double inv = 1.0 / d_(r, s);
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r || std::abs(d_(i, s)) <= eps_ * 1e-3) continue;
      const double factor = d_(i, s) * inv;
      d_.row(i) -= factor * d_.row(r);
      d_(i, s) = d_(r, s) * factor;
    }
    for (int j = 0; j < n_ + 2; ++j)
      if (j != s) d_(r, j) *= inv;
    for (int i = 0; i < m_ + 2; ++i)
      if (i != r) d_(i, s) *= -inv;
    d_(r, s) = inv;
    std::swap(basic_[r], nonbasic_[s]);
  }

  // Phase 1 optimizes the real objective (row m), phase 2 the auxiliary one.
  bool run(int phase) {
    const int row = m_ + phase - 1;
    for (int iter = 0; iter < kMaxPivots; ++iter) {
      int s = -1;
      for (int j = 0; j < n_ + 1; ++j) {
        if (nonbasic_[j] == -phase) continue;
        if (d_(row, j) < -eps_ && (s == -1 || nonbasic_[j] < nonbasic_[s])) s = j;
      }
      if (s == -1) return true;
      int r = -1;
      double best = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (d_(i, s) <= eps_) continue;
        const double ratio = d_(i, n_ + 1) / d_(i, s);
        if (r == -1 || ratio < best - 1e-12 * (1.0 + std::abs(best)) ||
            (ratio <= best + 1e-12 * (1.0 + std::abs(best)) && basic_[i] < basic_[r])) {
          r = i;
          best = ratio;
        }
      }
      if (r == -1) return false;
      pivot(r, s);
    }
    throw NumericalError("simplex: pivot limit exceeded");
  }

  static constexpr int kMaxPivots = 200000;

  int m_;
  int n_;
  double eps_;
  Matrix d_;
  std::vector<int> basic_;
  std::vector<int> nonbasic_;
};

}  // namespace detail

/// maximize c.x  subject to  A x <= b,  x >= 0.
inline Result maximize(const Matrix& A, const Vector& b, const Vector& c, double eps = kLpTol) {
  if (A.rows() != b.size()) throw DimensionError("lp::maximize rhs", A.rows(), b.size());
  if (A.cols() != c.size()) throw DimensionError("lp::maximize objective", A.cols(), c.size());
  return detail::Tableau(A, b, c, eps).solve();
}

/// minimize c.u  subject to  G u >= h,  u free.
inline Result minimize_free(const Vector& c, const Matrix& G, const Vector& h, double eps = kLpTol) {
  const Eigen::Index n = c.size();
  if (G.cols() != n) throw DimensionError("lp::minimize_free constraints", n, G.cols());
  Matrix A(G.rows(), 2 * n);
  A << -G, G;
  Vector obj(2 * n);
  obj << -c, c;
  Result split = maximize(A, -h, obj, eps);
  Result out;
  out.status = split.status;
  if (split.optimal()) {
    out.x = split.x.head(n) - split.x.tail(n);
    out.value = c.dot(out.x);
  } else if (split.status == Status::unbounded) {
    out.value = -std::numeric_limits<double>::infinity();
  }
  return out;
}

/// Whether z lies in the conic hull of the columns of `generators`, with each
/// coordinate matched to within `tol`.
inline bool in_conic_hull(const Matrix& generators, const Vector& z, double tol = kLpTol) {
  require_size(z, generators.rows(), "lp::in_conic_hull");
  if (generators.cols() == 0) return max_abs(z) <= tol;
  const Eigen::Index d = generators.rows();
  Matrix A(2 * d, generators.cols());
  A << generators, -generators;
  Vector b(2 * d);
  b << z.array() + tol, -(z.array() - tol);
  return maximize(A, b, Vector::Zero(generators.cols())).optimal();
}

}  // namespace latlab::lp

#endif  // LATLAB_LP_HPP
