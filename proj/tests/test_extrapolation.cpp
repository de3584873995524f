#include "latlab/extrapolation.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace latlab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<GeneratorMatrix> generator_family() {
  std::vector<GeneratorMatrix> out;
  out.push_back(neumann_laplacian_1d(3, 1.0));
  out.push_back(neumann_laplacian_1d(16, 1.0 / 15));
  out.push_back(multiplication_generator(vec({0, 1, 3})));
  out.push_back(multiplication_generator(vec({0.5, 2, 7, 0.1, 4})));
  // a Metzler matrix that is not symmetric
  Matrix a(3, 3);
  a << -2, 1, 0.5, 0.2, -1, 0.3, 0, 0.7, -3;
  out.emplace_back(a);
  return out;
}

}  // namespace

TEST(Generator, SpectralBoundAndCertificate) {
  const GeneratorMatrix g = neumann_laplacian_1d(3, 1.0);
  EXPECT_NEAR(g.spectral_bound(), 0.0, 1e-12);
  EXPECT_NEAR(g.lambda0(), GeneratorMatrix::kDefaultMargin, 1e-12);
  EXPECT_TRUE(g.metzler());
  EXPECT_TRUE(g.certified());
  EXPECT_THROW(GeneratorMatrix(Matrix::Zero(2, 3)), DimensionError);
  Matrix rot(2, 2);
  rot << 0, -1, 1, 0;
  const GeneratorMatrix r(rot);
  EXPECT_FALSE(r.metzler());
  EXPECT_FALSE(r.certified());
}

TEST(Generator, CertificatePointStaysAboveLambdaZero) {
  const GeneratorMatrix g = multiplication_generator(vec({5, 6}));
  const auto [a, b] = g.certificate_points();
  EXPECT_DOUBLE_EQ(a, g.lambda0());
  EXPECT_GT(b, a);
  EXPECT_TRUE(g.certified());
}

TEST(Resolvent, MultiplicationIsDiagonal) {
  const Vector m = vec({0, 1, 3});
  const Matrix r = resolvent(multiplication_generator(m), 1.0);
  EXPECT_TRUE(r.isApprox(Matrix(Vector((1.0 + m.array()).inverse()).asDiagonal()), 1e-15));
}

TEST(Resolvent, NeumannThreeNodes) {
  const GeneratorMatrix g = neumann_laplacian_1d(3, 1.0);
  Matrix expected_a(3, 3);
  expected_a << -1, 1, 0, 1, -2, 1, 0, 1, -1;
  EXPECT_EQ(g.matrix(), expected_a);
  EXPECT_EQ(g.matrix() * Vector::Ones(3), Vector::Zero(3));
  const Matrix r = resolvent(g, 1.0);
  EXPECT_GT(r.minCoeff(), 0.0);
  // independent inverse via the adjugate of 1 - A = [[2,-1,0],[-1,3,-1],[0,-1,2]], det 8
  Matrix adj(3, 3);
  adj << 5, 2, 1, 2, 4, 2, 1, 2, 5;
  EXPECT_LE((r - adj / 8.0).cwiseAbs().maxCoeff(), 1e-15);
  for (double mu : {0.5, 1.0, 2.0, 10.0})
    EXPECT_LE(max_abs(resolvent(g, mu) * Vector::Ones(3) - Vector::Constant(3, 1.0 / mu)), 1e-14);
}

TEST(Resolvent, Preconditions) {
  const GeneratorMatrix g = neumann_laplacian_1d(4, 1.0);
  EXPECT_THROW(resolvent(g, 0.0), PreconditionError);
  EXPECT_THROW(resolvent(g, g.lambda0()), PreconditionError);
  EXPECT_THROW(neumann_laplacian_1d(2, 1.0), PreconditionError);
  EXPECT_THROW(multiplication_generator(vec({1, -1})), PreconditionError);
}

TEST(Resolvent, IdentityAndPositivityOnFamily) {
  for (const auto& g : generator_family()) {
    const double a = std::max(1.0, g.lambda0() + 0.5), b = a + 1.0;
    const Matrix ra = g.resolvent(a), rb = g.resolvent(b);
    EXPECT_LE((ra - rb - (b - a) * ra * rb).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_GE(ra.minCoeff(), -1e-12);
    EXPECT_GE(rb.minCoeff(), -1e-12);
  }
}

TEST(Semigroup, NeumannTendsToMean) {
  const int n = 8;
  const GeneratorMatrix g = neumann_laplacian_1d(n, 1.0 / (n - 1));
  // oracle: spectral decomposition of the symmetric generator
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.matrix());
  const Matrix v = es.eigenvectors();
  const Vector lam = es.eigenvalues();
  Rng rng(41);
  const Vector x = rng.uniform_vector(n, -1, 1);
  const double t = 1000.0;
  const Vector via_eigen = v * (lam.array() * t).exp().matrix().asDiagonal() * v.transpose() * x;
  const Vector ours = g.semigroup(t) * x;
  EXPECT_LE(max_abs(ours - via_eigen), 1e-6);
  EXPECT_LE(max_abs(ours - Vector::Constant(n, x.mean())), 1e-6);
  for (double s : {0.1, 1.0, 10.0}) EXPECT_GE(g.semigroup(s).minCoeff(), -1e-12);
}

TEST(ExtrapolationNorm, Examples) {
  const ExtrapolationSpace s(NormSpec::lp(3, 2.0), multiplication_generator(vec({0, 1, 3})), 1.0);
  EXPECT_EQ(extrapolation_norm(s, Vector::Zero(3)), 0.0);
  EXPECT_NEAR(extrapolation_norm(s, Vector::Ones(3)), std::sqrt(21.0) / 4.0, 1e-15);
  EXPECT_THROW(ExtrapolationSpace(NormSpec::sobolev(GridDomain::interval(3 + 1), 1, 2.0),
                                  neumann_laplacian_1d(4, 1.0)),
               PreconditionError);
  EXPECT_THROW(ExtrapolationSpace(NormSpec::lp(4, 2.0), multiplication_generator(vec({0, 1, 3}))), DimensionError);
}

TEST(ExtrapolationNorm, LambdaEquivalenceBound) {
  for (const auto& g : generator_family()) {
    const NormSpec base = NormSpec::lp(Vector::LinSpaced(g.dim(), 1, 2), 2.0);
    const double l1 = std::max(1.0, g.lambda0() + 0.5), l2 = l1 + 1.0;
    const ExtrapolationSpace s1(base, g, l1), s2(base, g, l2);
    const LambdaEquivalence eq = lambda_equivalence_bound(g, base, l1, l2);
    Rng rng(42);
    for (int t = 0; t < 100; ++t) {
      const Vector x = rng.uniform_vector(g.dim(), -1, 1);
      const double ratio = s1.norm(x) / s2.norm(x);
      EXPECT_LE(ratio, eq.upper_factor * (1 + 1e-12));
      EXPECT_GE(ratio, 1.0 / eq.lower_factor * (1 - 1e-12));
      EXPECT_LE(ratio, eq.rho() * (1 + 1e-12));
      EXPECT_GE(ratio, 1.0 / eq.rho() * (1 - 1e-12));
    }
  }
}

TEST(ExtrapolationCone, AgreesWithStandardConeOnFamily) {
  Rng rng(43);
  for (const auto& g : generator_family()) {
    const ExtrapolationSpace s(NormSpec::lp(g.dim(), 2.0), g);
    int checked = 0;
    for (int t = 0; t < 1000; ++t) {
      Vector x = rng.uniform_vector(g.dim(), -1, 1);
      if (t % 2 == 0) x = x.cwiseAbs();
      EXPECT_EQ(s.cone_contains(x), x.minCoeff() >= 0.0) << x.transpose();
      ++checked;
    }
    EXPECT_EQ(checked, 1000);
  }
}

TEST(MultiplicationExample, IdentityAndCone) {
  Rng rng(44);
  for (const Vector& m : {vec({0, 1, 3}), Vector(rng.uniform_vector(5, 0, 4)), Vector(rng.uniform_vector(7, 0, 10))}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const Report r = multiplication_example_check(m, p, Vector::LinSpaced(m.size(), 0.5, 2.0));
      EXPECT_TRUE(r.pass) << r.detail;
      EXPECT_LE(r.worst, 1e-12);
    }
  }
  // m = 0: the resolvent at 1 is the identity
  const ExtrapolationSpace zero(NormSpec::lp(3, 2.0), multiplication_generator(Vector::Zero(3)), 1.0);
  const Vector x = vec({0.3, -1, 2});
  EXPECT_DOUBLE_EQ(zero.norm(x), x.norm());
}

TEST(ResolventScheme, ConvergesAndMatchesModulus) {
  const int n = 32;
  const GeneratorMatrix g = neumann_laplacian_1d(n, 1.0 / (n - 1));
  const ApproximationScheme scheme = resolvent_scheme(g);
  EXPECT_GT(static_cast<double>(scheme.n_min), g.lambda0());
  Rng rng(45);
  for (int t = 0; t < 5; ++t) {
    const Vector x = rng.uniform_vector(n, -1, 1);
    // for symmetric A each eigencomponent of x shrinks by |l| / (k + |l|), so the
    // Euclidean error is strictly decreasing and at most ||Ax|| / k
    double prev = 1e300;
    for (long k = 2; k <= 256; k *= 2) {
      const double err = (Vector(scheme.R(k) * x) - x).norm();
      EXPECT_LT(err, prev);
      EXPECT_LE(err, (g.matrix() * x).norm() / static_cast<double>(k) * (1 + 1e-12));
      prev = err;
    }
  }
  const ExtrapolationSpace s(NormSpec::lp(n, 2.0), g);
  for (int t = 0; t < 5; ++t) {
    const Vector z = rng.uniform_vector(n, -1, 1);
    EXPECT_LE(max_abs(resolvent_sup(s, z, 1e-9).s - z.cwiseAbs()), 10 * 1e-9);
    const Vector pos = z.cwiseAbs();
    EXPECT_LE(max_abs(resolvent_sup(s, pos, 1e-9).s - pos), 1e-9);
  }
}
