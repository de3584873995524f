#include "latlab/sobolev_grid.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace latlab;

namespace {

constexpr double kPi = 3.141592653589793;

// Trapezoid rule on a fine uniform mesh; independent of the library quadrature.
double trapezoid(const std::function<double(double)>& f, double a, double b, int m) {
  const double h = (b - a) / m;
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < m; ++i) s += f(a + i * h);
  return s * h;
}

double raw_bump(double t) { return std::abs(t) < 1 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

Vector random_smooth(const GridDomain& d, Rng& rng, int modes = 3) {
  std::vector<double> a(modes), ph(modes);
  for (int k = 0; k < modes; ++k) a[k] = rng.uniform(-1, 1), ph[k] = rng.uniform(0, 2 * kPi);
  return GridFunction::sample(d, [&](double t) {
           double v = 0;
           for (int k = 0; k < modes; ++k) v += a[k] * std::sin(2 * kPi * (k + 1) * t + ph[k]) / (k + 1);
           return v;
         }).values();
}

}  // namespace

TEST(SobolevNorm, Examples) {
  const auto t = GridDomain::torus(32);
  EXPECT_EQ(sobolev_norm(GridFunction::zeros(t), 1, 2.0), 0.0);
  const GridFunction c(t, Vector::Constant(32, -1.5));
  EXPECT_NEAR(sobolev_norm(c, 1, 3.0), 1.5, 1e-14);
  const auto i = GridDomain::interval(101);
  const GridFunction lin = GridFunction::sample(i, [](double x) { return x; });
  EXPECT_NEAR(sobolev_norm(lin, 1, 2.0), std::sqrt(1.0 / 3.0 + 1.0), 2 * i.h());
  EXPECT_THROW(sobolev_norm(GridFunction::zeros(GridDomain::interval(5)), 4, 2.0), PreconditionError);
}

TEST(NegativeSobolev, Examples) {
  const auto t = GridDomain::torus(64);
  EXPECT_EQ(negative_sobolev_norm(GridFunction::zeros(t), 1, 2.0), 0.0);
  EXPECT_NEAR(negative_sobolev_norm(GridFunction(t, Vector::Ones(64)), 1, 2.0), 1.0, 1e-12);
}

TEST(NegativeSobolev, HilbertCaseMatchesIndependentSolve) {
  Rng rng(31);
  for (int n : {8, 16, 32, 64}) {
    for (bool periodic : {false, true}) {
      const auto d = periodic ? GridDomain::torus(n) : GridDomain::interval(n);
      const Vector g = rng.uniform_vector(n, -1, 1);
      for (int k : {1, 2}) {
        const double ours = negative_sobolev_norm(GridFunction(d, g), k, 2.0);
        const double ref = oracle::dual_sobolev_1d(g, k, d.h(), periodic);
        EXPECT_NEAR(ours, ref, 1e-6 * ref) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(NegativeSobolev, GeneralExponentHasSmallGap) {
  const auto d = GridDomain::interval(24);
  Rng rng(32);
  for (double p : {1.5, 3.0}) {
    const DualNormValue v = negative_sobolev_bounds(GridFunction(d, rng.uniform_vector(24, -1, 1)), 1, p);
    EXPECT_LE(v.lower, v.upper * (1 + 1e-12));
    EXPECT_LE(v.relative_gap(), 1e-4);
  }
}

TEST(Mollifier, ConstantNormalizesContinuousIntegral) {
  const double mass1 = trapezoid(raw_bump, -1, 1, 200000);
  EXPECT_NEAR(Mollifier(1).constant(), 1.0 / mass1, 1e-9 / mass1);
  const double mass2 = 2 * kPi * trapezoid([](double r) { return r * raw_bump(r); }, 0, 1, 200000);
  EXPECT_NEAR(Mollifier(2).constant(), 1.0 / mass2, 1e-9 / mass2);
  EXPECT_THROW(Mollifier(3), PreconditionError);
}

TEST(Mollifier, DiscreteKernelSumsToOne) {
  for (const auto& d : {GridDomain::torus(200), GridDomain::rectangle(41)}) {
    for (double delta : {0.05, 0.1, 0.2}) {
      const DiscreteKernel k = mollifier_kernel(d, delta);
      EXPECT_NEAR(k.weights.sum(), 1.0, 1e-10);
      EXPECT_GE(k.weights.minCoeff(), 0.0);
      // before renormalization the Riemann sum is already within 10% of 1
      EXPECT_NEAR(k.raw_integral, 1.0, 0.1);
    }
  }
}

TEST(Mollify, ConstantsPositivityAndResolution) {
  const auto t = GridDomain::torus(128);
  const GridFunction c(t, Vector::Constant(128, 2.5));
  EXPECT_LE(max_abs(mollify(c, 0.1).values() - c.values()), 1e-14);
  Rng rng(33);
  const GridFunction pos(t, rng.uniform_vector(128, 0, 1));
  EXPECT_GE(mollify(pos, 0.05).values().minCoeff(), 0.0);
  EXPECT_THROW(mollify(pos, 1.5 * t.h()), PreconditionError);
  const auto sq = GridDomain::rectangle(33);
  const GridFunction pos2(sq, rng.uniform_vector(sq.size(), 0, 1));
  EXPECT_GE(mollify(pos2, 0.1).values().minCoeff(), 0.0);
}

TEST(Mollify, LipschitzBound) {
  const auto t = GridDomain::torus(512);
  // the triangle wave 1/4 - |x - 1/2| has Lipschitz constant 1
  const GridFunction f = GridFunction::sample(t, [](double x) { return 0.25 - std::abs(x - 0.5); });
  for (double delta : {0.1, 0.05, 0.025})
    EXPECT_LE(max_abs(mollify(f, delta).values() - f.values()), 1.0 * delta);
}

TEST(Mollify, SecondOrderOnSmoothFunctions) {
  const auto t = GridDomain::torus(4096);
  const GridFunction f = GridFunction::sample(t, [](double x) { return std::sin(2 * kPi * x) + 0.3 * std::cos(6 * kPi * x); });
  std::vector<double> err;
  for (double delta : {0.04, 0.02, 0.01}) err.push_back(max_abs(mollify(f, delta).values() - f.values()));
  EXPECT_GE(std::log2(err[0] / err[1]), 1.8);
  EXPECT_GE(std::log2(err[1] / err[2]), 1.8);
}

TEST(MollifierScheme, CollapsesToIdentityBelowSpacing) {
  const auto t = GridDomain::torus(64);
  const ApproximationScheme s = mollifier_scheme(t);
  const Operator r = s.R(64);
  EXPECT_EQ(r.nonZeros(), 64);
  EXPECT_TRUE(Matrix(r).isIdentity());
}

TEST(Chart, InteriorIntervalExample) {
  const auto d = GridDomain::interval(65);
  const BoundaryChart c = build_boundary_chart(d, Point(0.5, 0), 0.25);
  EXPECT_EQ(c.kind(), ChartKind::interior);
  EXPECT_NEAR(c.apply(2, Point(0.25, 0))[0], 0.375, 1e-15);
  EXPECT_NEAR(c.apply(2, Point(0.75, 0))[0], 0.625, 1e-15);
  EXPECT_TRUE(c.in_V(Point(0.3, 0)));
  EXPECT_FALSE(c.in_V(Point(0.2, 0)));
}

TEST(Chart, EndpointExample) {
  const auto d = GridDomain::interval(65);
  const double r = 0.5;
  const BoundaryChart c = build_boundary_chart(d, Point(0, 0), r);
  EXPECT_EQ(c.kind(), ChartKind::edge);
  EXPECT_NEAR(c.compression_center()[0], r / 4, 1e-15);
  for (double x : {0.0, 0.1, 0.2, 0.3}) EXPECT_NEAR(c.apply(2, Point(x, 0))[0], x / 2 + r / 8, 1e-15);
  const BoundaryChart right = build_boundary_chart(d, Point(1, 0), r);
  EXPECT_NEAR(right.apply(2, Point(1, 0))[0], 1 - r / 8, 1e-15);
  const ChartAudit a = audit_chart(c, d, chart_audit_indices());
  EXPECT_EQ(a.violations, 0);
  EXPECT_EQ(a.samples, 10000 * static_cast<long>(chart_audit_indices().size()));
}

TEST(Chart, RectangleEdgeExample) {
  const auto d = GridDomain::rectangle(33);
  const double r = 0.4;
  const BoundaryChart c = build_boundary_chart(d, Point(0.5, 0), r);
  EXPECT_EQ(c.kind(), ChartKind::edge);
  const Point center = c.to_global(c.compression_center());
  EXPECT_NEAR(center[0], 0.5, 1e-15);
  EXPECT_NEAR(center[1], r / 4, 1e-15);
  // compression acts on the vertical coordinate only
  const Point y = c.apply(2, Point(0.52, 0.0));
  EXPECT_NEAR(y[0], 0.52, 1e-15);
  EXPECT_NEAR(y[1], r / 8, 1e-15);
  EXPECT_EQ(audit_chart(c, d, chart_audit_indices()).violations, 0);
}

TEST(Chart, CornersAndAllSides) {
  const auto d = GridDomain::rectangle(33);
  for (const Point& x0 : {Point(0, 0), Point(1, 0), Point(0, 1), Point(1, 1)}) {
    const BoundaryChart c = build_boundary_chart(d, x0);
    EXPECT_EQ(c.kind(), ChartKind::corner);
    EXPECT_EQ(audit_chart(c, d, chart_audit_indices()).violations, 0);
  }
  for (const Point& x0 : {Point(0, 0.3), Point(1, 0.6), Point(0.7, 1), Point(0.2, 0)})
    EXPECT_EQ(audit_chart(build_boundary_chart(d, x0), d, chart_audit_indices()).violations, 0);
}

TEST(Chart, AffineMapsTendToIdentity) {
  const auto d = GridDomain::rectangle(33);
  const BoundaryChart c = build_boundary_chart(d, Point(1, 0.5), 0.3);
  double prev = 1e300;
  for (long n : {2L, 4L, 8L, 16L, 1024L}) {
    const double dev = (c.B(n) - Eigen::Matrix2d::Identity()).norm() + c.b(n).norm();
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  EXPECT_LT(prev, 5e-3);
  // B_n x + b_n reproduces apply
  const Point x(0.9, 0.45);
  EXPECT_LE((c.B(8) * x + c.b(8) - c.apply(8, x)).norm(), 1e-14);
  EXPECT_LE((c.apply_inverse(8, c.apply(8, x)) - x).norm(), 1e-14);
}

TEST(Chart, Preconditions) {
  const auto d = GridDomain::interval(33);
  EXPECT_THROW(build_boundary_chart(d, Point(1.5, 0)), PreconditionError);
  EXPECT_THROW(build_boundary_chart(d, Point(0.5, 0), 0.6), PreconditionError);
  EXPECT_THROW(build_boundary_chart(GridDomain::torus(33), Point(0.5, 0)), PreconditionError);
  const auto sq = GridDomain::rectangle(17);
  EXPECT_THROW(build_boundary_chart(sq, Point(0.1, 0), 0.3), PreconditionError);
}

TEST(Chart, OutwardChartFailsAudit) {
  // a left-endpoint chart whose normal points out of the interval
  const auto d = GridDomain::interval(33);
  Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
  Q(0, 0) = -1;
  const BoundaryChart bad(ChartKind::edge, 1, Point(0, 0), 0.5, Q);
  const ChartAudit a = audit_chart(bad, d, {2});
  EXPECT_GT(a.violations, 0);
  ASSERT_TRUE(a.first_violation.has_value());
  EXPECT_EQ(a.first_violation->second, 2);
}

TEST(Cover, IntervalPartitionOfUnity) {
  const auto d = GridDomain::interval(129);
  const ChartCover cover = build_chart_cover(d);
  EXPECT_EQ(cover.charts().size(), 3u);
  Rng rng(34);
  for (int t = 0; t < 1000; ++t) {
    const Point x(rng.uniform(), 0);
    const auto h = cover.partition(x);
    double s = 0;
    for (double v : h) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
}

TEST(Cover, RectangleCoversClosure) {
  const auto d = GridDomain::rectangle(33);
  const ChartCover cover = build_chart_cover(d);
  EXPECT_GT(cover.charts().size(), 8u);
  for (const auto& c : cover.charts()) EXPECT_EQ(audit_chart(c, d, {2, 8}, 500).violations, 0);
  EXPECT_NO_THROW(cover.verify(5000, 99));
}

TEST(PushIn, IntervalSupportPositivityAndConvergence) {
  const auto d = GridDomain::interval(513);
  const ChartCover cover = build_chart_cover(d);
  Rng rng(35);
  double prev = 1e300;
  const Vector f = random_smooth(d, rng);
  for (long n : {2L, 4L, 8L, 16L}) {
    const PushIn s = pushin_operator(cover, n);
    const Vector one = s.S * Vector::Ones(d.size());
    for (int i = 0; i < d.size(); ++i)
      if (!s.in_K[i]) EXPECT_EQ(one[i], 0.0);
    EXPECT_FALSE(s.in_K.front());
    EXPECT_FALSE(s.in_K.back());
    EXPECT_EQ(one[0], 0.0);
    EXPECT_EQ(one[d.size() - 1], 0.0);
    EXPECT_GT(s.boundary_distance, 0.0);
    EXPECT_TRUE(entrywise_nonnegative(s.S));
    const double err = lp_norm(d, s.S * f - f, 2.0);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(PushIn, SobolevErrorDecreasesForCompactSupport) {
  const auto d = GridDomain::interval(1025);
  const ChartCover cover = build_chart_cover(d);
  const GridFunction f = GridFunction::sample(d, [](double t) {
    return (t > 0.3 && t < 0.7) ? std::pow(std::sin(kPi * (t - 0.3) / 0.4), 4) : 0.0;
  });
  double prev = 1e300;
  for (long n : {2L, 4L, 8L, 16L}) {
    const double err = sobolev_norm(GridFunction(d, pushin_operator(cover, n).S * f.values() - f.values()), 1, 2.0);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(PushIn, RectangleVanishesOutsideK) {
  const auto d = GridDomain::rectangle(33);
  const ChartCover cover = build_chart_cover(d);
  Rng rng(36);
  for (long n : {2L, 4L, 8L}) {
    const PushIn s = pushin_operator(cover, n);
    EXPECT_TRUE(entrywise_nonnegative(s.S));
    for (int t = 0; t < 20; ++t) {
      const Vector out = s.S * rng.uniform_vector(d.size(), -1, 1);
      for (int i = 0; i < d.size(); ++i)
        if (!s.in_K[i]) ASSERT_EQ(out[i], 0.0);
    }
    for (int i = 0; i < d.size(); ++i)
      if (d.boundary_distance(d.node(i)) == 0.0) EXPECT_FALSE(s.in_K[i]);
  }
}

TEST(BoundaryApprox, SupportPositivityAndConstants) {
  const auto d = GridDomain::interval(513);
  const ChartCover cover = build_chart_cover(d);
  Rng rng(37);
  double prev = 1e300;
  for (long n : {2L, 4L, 8L}) {
    const BoundaryApproximation a = approx_identity_with_boundary(cover, n);
    EXPECT_TRUE(entrywise_nonnegative(a.R));
    for (int t = 0; t < 20; ++t) {
      const Vector out = a.R * rng.uniform_vector(d.size(), -1, 1);
      double min_dist = 1e300;
      for (int i = 0; i < d.size(); ++i)
        if (out[i] != 0.0) min_dist = std::min(min_dist, d.boundary_distance(d.node(i)));
      EXPECT_GE(min_dist, a.delta - d.h());
      EXPECT_EQ(out[0], 0.0);
      EXPECT_EQ(out[d.size() - 1], 0.0);
    }
    // f = 1: error on nodes at distance >= 0.1 from the boundary
    const Vector one = a.R * Vector::Ones(d.size());
    double err = 0;
    for (int i = 0; i < d.size(); ++i)
      if (d.boundary_distance(d.node(i)) >= 0.1) err += d.h() * (one[i] - 1) * (one[i] - 1);
    err = std::sqrt(err);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_THROW(approx_identity_with_boundary(build_chart_cover(GridDomain::interval(33)), 32), PreconditionError);
}

TEST(PositiveDominant, Examples) {
  const auto d = GridDomain::interval(257);
  EXPECT_EQ(positive_dominant_w0(GridFunction::zeros(d), 1, 2.0).values(), Vector::Zero(257));
  Vector s = GridFunction::sample(d, [](double t) { return std::sin(2 * kPi * t); }).values();
  s[0] = s[256] = 0.0;
  const Vector g = positive_dominant_w0(GridFunction(d, s), 1, 2.0).values();
  EXPECT_GE(g.minCoeff(), 0.0);
  EXPECT_GE((g - positive_part(s)).minCoeff(), -1e-12);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[256], 0.0);
}

TEST(PositiveDominant, RandomFunctionsOfOrderOneAndTwo) {
  const auto d = GridDomain::interval(201);
  Rng rng(38);
  for (int k : {1, 2}) {
    for (int t = 0; t < 20; ++t) {
      // smooth bump times random smooth function vanishes to high order at both ends
      Vector f = GridFunction::sample(d, [](double x) { return std::pow(x * (1 - x), 3); }).values();
      f = f.cwiseProduct(random_smooth(d, rng));
      if (t % 3 == 0) f = f.cwiseAbs();
      for (int i = 0; i < k; ++i) f[i] = f[200 - i] = 0.0;
      const Vector g = positive_dominant_w0(GridFunction(d, f), k, 2.0).values();
      EXPECT_GE(g.minCoeff(), 0.0);
      EXPECT_GE((g - f).minCoeff(), -1e-10);
      for (int i = 0; i < k; ++i) {
        EXPECT_LE(std::abs(g[i]), 1e-10);
        EXPECT_LE(std::abs(g[200 - i]), 1e-10);
      }
    }
  }
}

TEST(PositiveDominant, Preconditions) {
  const auto d = GridDomain::interval(33);
  Vector f = Vector::Zero(33);
  f[0] = 1.0;
  EXPECT_THROW(positive_dominant_w0(GridFunction(d, f), 1, 2.0), PreconditionError);
  f[0] = 0.0;
  f[1] = 1.0;
  EXPECT_NO_THROW(positive_dominant_w0(GridFunction(d, f), 1, 2.0));
  EXPECT_THROW(positive_dominant_w0(GridFunction(d, f), 2, 2.0), PreconditionError);
  EXPECT_THROW(positive_dominant_w0(GridFunction::zeros(GridDomain::torus(33)), 1, 2.0), PreconditionError);
}
