#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace qjunction;
constexpr double pi = std::numbers::pi;

namespace {

SinglePoleModel handmade(const Eigen::VectorXd& e, double alpha2, double lambda0F) {
  SinglePoleModel m;
  m.lambda0 = 5.0;
  m.lambda0F = lambda0F;
  m.alpha = std::sqrt(alpha2);
  m.alpha2 = Eigen::VectorXd::Constant(1, alpha2);
  m.phi0F = m.alpha * e.normalized();
  m.residue = m.phi0F * m.phi0F.transpose();
  m.P0 = e.normalized() * e.normalized().transpose();
  m.group = {0};
  return m;
}

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * (i + 0.5) / n);
  return g;
}

}  // namespace

TEST(Scattering, CayleyLimits) {
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(3, 1.3);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(3, 3);
  EXPECT_NEAR((cayley(Eigen::MatrixXcd::Zero(3, 3), p) - id).norm(), 0.0, 1e-15);
  EXPECT_NEAR((cayley(1e12 * id, p) + id).norm(), 0.0, 1e-11);
  EXPECT_NEAR((cayley(-1e12 * id, p) + id).norm(), 0.0, 1e-11);
}

TEST(Scattering, RandomSymmetricDnGivesUnitarySymmetricS) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd a(4, 4);
    for (int i = 0; i < 16; ++i) a.data()[i] = 3.0 * g(rng);
    const Eigen::MatrixXd dn = a + a.transpose();
    Eigen::VectorXd p(4);
    for (int i = 0; i < 4; ++i) p[i] = 0.2 + std::abs(g(rng));
    const Eigen::MatrixXcd s = cayley(dn.cast<cplx>(), p);
    EXPECT_LE(unitarity_defect(s), 1e-12);
    EXPECT_LE(reciprocity_defect(s), 1e-12);
    // left and right forms of the Cayley transform agree
    const Eigen::MatrixXcd b = p.cwiseSqrt().cwiseInverse().asDiagonal() * dn * p.cwiseSqrt().cwiseInverse().asDiagonal();
    const Eigen::MatrixXcd i1 = cplx(0, 1) * Eigen::MatrixXcd::Identity(4, 4);
    const Eigen::MatrixXcd right = (i1 + b) * (i1 - b).inverse();
    EXPECT_NEAR((s - right).norm(), 0.0, 1e-11);
  }
}

TEST(Scattering, ThetaCases) {
  EXPECT_EQ(theta(1.0, 1.5, 4.7, 4.7), cplx(-1.0, 0.0));
  EXPECT_EQ(theta(1.0, 0.0, 4.7, 6.0), cplx(1.0, 0.0));
  for (double lambda = 4.01; lambda < 16.0; lambda += 0.37)
    EXPECT_NEAR(std::abs(theta(std::sqrt(lambda - 4.0), 1.4, 4.73, lambda)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(theta(1.0, 1.0, 5.0, 1e9) - 1.0), 0.0, 1e-8);
}

TEST(Scattering, ThetaPhaseCrossesMinusOneAtThePole) {
  const auto& d = qjtest::example_data();
  const auto m = single_pole_fit(d, {qjtest::phi0_index(d)});
  EXPECT_EQ(theta(m, d.basis, m.lambda0F), cplx(-1.0, 0.0));
  for (double delta : {1e-3, 1e-2, 0.1}) {
    const double below = std::arg(theta(m, d.basis, m.lambda0F - delta));
    const double above = std::arg(theta(m, d.basis, m.lambda0F + delta));
    EXPECT_GT(below, pi / 2);
    EXPECT_LT(below, pi);
    EXPECT_GT(above, -pi);
    EXPECT_LT(above, -pi / 2);
  }
}

TEST(Scattering, ReflectedVectorTransmission) {
  Eigen::VectorXd e(3);
  e << -0.8, 0.6, 0.0;
  const auto m = handmade(e, 0.15, 4.5);
  const auto basis = channel_basis(builtin_example());
  const auto s = s_approx(m, basis, 4.5);
  EXPECT_NEAR(s.matrix(0, 1).real(), 0.96, 1e-15);
  EXPECT_NEAR(transmission(s)(0, 1), 0.9216, 1e-14);
  EXPECT_NEAR(transmission(s)(2, 2), 1.0, 1e-15);
  const Eigen::MatrixXcd datta = Eigen::MatrixXcd::Identity(3, 3) - 2.0 * m.P0.cast<cplx>();
  EXPECT_NEAR((s.matrix - datta).norm(), 0.0, 1e-15);
}

TEST(Scattering, ApproximateEqualsCayleyOfThePolarTerm) {
  const auto& d = qjtest::example_data();
  const auto m = single_pole_fit(d, {qjtest::phi0_index(d)});
  for (double lambda : grid(4.0, 16.0, 40)) {
    const auto sa = s_approx(m, d.basis, lambda);
    const Eigen::MatrixXcd sc = cayley(m.residue.cast<cplx>() / (lambda - m.lambda0F), sa.p);
    EXPECT_NEAR((sa.matrix - sc).norm(), 0.0, 1e-12);
    EXPECT_LE(unitarity_defect(sa.matrix), 1e-12);
    const Eigen::MatrixXd t = transmission(sa);
    EXPECT_NEAR((t.rowwise().sum().array() - 1.0).abs().maxCoeff(), 0.0, 1e-12);
  }
}

TEST(Scattering, ExactPathUnitaryAndReciprocal) {
  const auto& d = qjtest::example_data();
  for (double lambda : grid(4.0, 16.0, 400)) {
    const auto s = s_exact(lambda, d);
    EXPECT_LE(unitarity_defect(s.matrix), 1e-10) << lambda;
    EXPECT_LE(reciprocity_defect(s.matrix), 1e-10) << lambda;
    EXPECT_NEAR((transmission(s).colwise().sum().array() - 1.0).abs().maxCoeff(), 0.0, 1e-10);
  }
  EXPECT_THROW(s_exact(3.9, d), NumericalError);
  EXPECT_THROW(s_exact(16.1, d), NumericalError);
}

TEST(Scattering, ResonanceVectorIsReflectedAtThePole) {
  const auto& d = qjtest::example_data();
  const auto m = single_pole_fit(d, {qjtest::phi0_index(d)});
  const Eigen::VectorXcd e = m.e0().cast<cplx>();
  for (double eps : {1e-7, -1e-7}) {
    const auto s = s_exact(m.lambda0F + eps, d);
    EXPECT_NEAR(std::abs(e.dot(s.matrix * e) + 1.0), 0.0, 1e-4);
  }
}

TEST(Scattering, UnequalWiresStayUnitary) {
  auto spec = builtin_example();
  spec.wires[1].width = 1.4;
  const auto d = spectral_data(spec);
  EXPECT_FALSE(d.basis.uniform_open_threshold());
  const auto [lo, hi] = d.basis.band();
  for (double lambda : grid(lo, hi, 60)) {
    const auto s = s_exact(lambda, d);
    EXPECT_LE(unitarity_defect(s.matrix), 1e-10);
    EXPECT_LE(reciprocity_defect(s.matrix), 1e-10);
  }
}

TEST(Scattering, SweepIsOrderedAndThreadIndependent) {
  const auto& d = qjtest::example_data();
  std::vector<double> g = grid(4.0, 16.0, 97);
  g.push_back(5.0);   // interior eigenvalue: pole of the series
  g.push_back(16.0);  // threshold
  const auto one = sweep(d, g, SweepMethod::exact, nullptr, 1);
  const auto four = sweep(d, g, SweepMethod::exact, nullptr, 4);
  ASSERT_EQ(one.rows.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(one.rows[i].lambda, g[i]);
    EXPECT_EQ(one.rows[i].flagged, four.rows[i].flagged);
    if (!one.rows[i].flagged) {
      EXPECT_TRUE(one.rows[i].s.matrix == four.rows[i].s.matrix);
      EXPECT_LE(one.rows[i].unitarity, 1e-10);
    }
  }
  EXPECT_TRUE(one.rows[97].flagged);
  EXPECT_TRUE(one.rows[98].flagged);
  EXPECT_TRUE(sweep(d, {}, SweepMethod::exact).rows.empty());
  EXPECT_THROW(sweep(d, g, SweepMethod::pole), std::invalid_argument);
}

TEST(Scattering, PoleSweepPeaksAtTheResonance) {
  const auto& d = qjtest::example_data();
  const auto m = single_pole_fit(d, {qjtest::phi0_index(d)});
  const double step = 12.0 / 400;
  const auto g = grid(4.0, 16.0, 400);
  const auto res = sweep(d, g, SweepMethod::pole, &m);
  double best = -1.0, at = 0.0;
  for (const auto& row : res.rows) {
    ASSERT_FALSE(row.flagged);
    EXPECT_LE(row.unitarity, 1e-12);
    const double off = row.t.sum() - row.t.trace();
    if (off > best) best = off, at = row.lambda;
  }
  EXPECT_LE(std::abs(at - m.lambda0F), step);
}
