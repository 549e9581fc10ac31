#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace qjunction;
constexpr double pi = std::numbers::pi;

TEST(Channels, MomentumExamples) {
  EXPECT_EQ(momentum(5.0, 4.0), cplx(1.0, 0.0));
  EXPECT_NEAR(std::abs(momentum(5.0, 16.0) - cplx(0.0, std::sqrt(11.0))), 0.0, 1e-15);
  EXPECT_EQ(momentum(4.0, 4.0), cplx(0.0, 0.0));
}

TEST(Channels, MomentumSquaresBack) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    const double lambda = u(rng), tau = u(rng);
    const cplx p = momentum(lambda, tau);
    EXPECT_NEAR(std::abs(p * p - (lambda - tau)), 0.0, 1e-12 * (1.0 + std::abs(lambda - tau)));
    EXPECT_GE(p.imag(), 0.0);
    EXPECT_GE(p.real(), 0.0);
    const cplx pc = momentum(cplx(lambda, 1e-3), tau);
    EXPECT_GT(pc.imag(), 0.0);
  }
}

TEST(Channels, ExampleBasis) {
  const auto basis = channel_basis(builtin_example());
  EXPECT_EQ(basis.open_count(), 3);
  EXPECT_EQ(basis.closed_count(), 3 * 7);
  EXPECT_EQ(basis.size(), 24);
  const auto [lo, hi] = basis.band();
  EXPECT_NEAR(lo, 4.0, 1e-12);
  EXPECT_NEAR(hi, 16.0, 1e-12);
  EXPECT_TRUE(basis.uniform_open_threshold());
  for (int s = 0; s < 3; ++s) {
    EXPECT_EQ(basis.index(s, 1), s);
    for (int l = 2; l <= 8; ++l) EXPECT_EQ(basis.index(s, l), 3 + s * 7 + (l - 2));
  }
}

TEST(Channels, SingleWideWire) {
  JunctionSpec spec;
  spec.wires = {{1, Side::left, 0.0, pi, 0.0}};
  spec.solver.closed_modes = 3;
  const auto basis = channel_basis(spec);
  EXPECT_NEAR(basis.mode(0, 1).threshold, 1.0, 1e-12);
  EXPECT_NEAR(basis.mode(0, 2).threshold, 4.0, 1e-12);
  EXPECT_NEAR(basis.mode(0, 3).threshold, 9.0, 1e-12);
  spec.solver.closed_modes = 2;
  EXPECT_EQ(channel_basis(spec).closed_count(), 1);
}

TEST(Channels, EmptyBandIsNumericalError) {
  auto spec = builtin_example();
  spec.wires[2].width = pi / 5;  // τ1 = 25 above the others' τ2 = 16
  EXPECT_THROW(channel_basis(spec), NumericalError);
}

TEST(Channels, KMinusExample) {
  auto spec = builtin_example();
  spec.solver.closed_modes = 3;
  const auto basis = channel_basis(spec);
  const auto k = k_minus(basis, 5.0);
  ASSERT_EQ(k.size(), 6);
  for (int s = 0; s < 3; ++s) {
    EXPECT_NEAR(k[2 * s], std::sqrt(11.0), 1e-14);
    EXPECT_NEAR(k[2 * s + 1], std::sqrt(31.0), 1e-14);
  }
  EXPECT_THROW(k_minus(basis, 16.0), NumericalError);
  EXPECT_THROW(k_minus(basis, 20.0), NumericalError);
}

TEST(Channels, KMinusBound) {
  for (double delta : {pi / 2, 1.0, 0.3}) {
    JunctionSpec spec;
    spec.well = {4.0, 4.0, {0.0, 0.0}};
    spec.wires = {{1, Side::left, 0.0, delta, 0.0}, {2, Side::top, 0.5, delta, 0.0}};
    const auto basis = channel_basis(spec);
    const double lf = 2.5 * pi * pi / (delta * delta);
    EXPECT_NEAR(k_minus(basis, lf).minCoeff(), std::sqrt(1.5) * pi / delta, 1e-12 * pi / delta);
  }
}

TEST(Channels, KMinusDecreasesInLambda) {
  const auto basis = channel_basis(builtin_example());
  Eigen::VectorXd prev = k_minus(basis, 4.01);
  for (double lambda = 4.5; lambda < 16.0; lambda += 0.5) {
    const Eigen::VectorXd k = k_minus(basis, lambda);
    EXPECT_TRUE((k.array() < prev.array()).all());
    EXPECT_TRUE((k.array() > 0.0).all());
    prev = k;
  }
}

TEST(Channels, ProfilesAreOrthonormalAndVanishAtEnds) {
  const auto basis = channel_basis(builtin_example());
  for (int s = 0; s < 3; ++s) {
    for (int l = 1; l <= basis.l_max(); ++l) {
      const auto& m = basis.mode(s, l);
      EXPECT_NEAR(m(m.segment_begin()), 0.0, 1e-12);
      EXPECT_NEAR(m(m.far_end), 0.0, 1e-12);
      for (int k = 1; k <= basis.l_max(); ++k) {
        const auto& n = basis.mode(s, k);
        const double g = oracle::overlap_quadrature(m, n, m.segment_begin(), m.far_end, 256);
        EXPECT_NEAR(g, l == k ? 1.0 : 0.0, 1e-12);
      }
    }
  }
}

TEST(Channels, TraceOfAProfileIsAUnitVector) {
  const auto basis = channel_basis(builtin_example());
  const auto& e1 = basis.mode(0, 1);
  const Eigen::VectorXd c = trace_decompose(std::function<double(double)>(e1), basis, 0, 256);
  EXPECT_NEAR(c[0], 1.0, 1e-12);
  EXPECT_NEAR(c.tail(c.size() - 1).norm(), 0.0, 1e-12);
}

TEST(Channels, TraceDecomposeSin2OnWire3) {
  const auto basis = channel_basis(builtin_example());
  const TrigSeries f{{{1.0, 2.0, 0.0}}};
  const Eigen::VectorXd c = trace_decompose(f, basis, 2);
  EXPECT_NEAR(c[0], 0.0, 1e-14);
  EXPECT_NEAR(c[1], 2.0 * (2.0 / 3.0) / std::sqrt(pi), 1e-14);
  const Eigen::VectorXd q = trace_decompose(std::function<double(double)>(f), basis, 2, 256);
  EXPECT_NEAR((c - q).norm(), 0.0, 1e-10);
}

TEST(Channels, TraceDecomposeIsLinear) {
  const auto basis = channel_basis(builtin_example());
  EXPECT_NEAR(trace_decompose(TrigSeries{}, basis, 1).norm(), 0.0, 0.0);
  const TrigSeries f{{{0.7, 3.0, 0.2}}}, g{{{-1.3, 1.0, 1.1}}};
  const TrigSeries fg{{{0.7, 3.0, 0.2}, {-1.3 * 2.5, 1.0, 1.1}}};
  for (int s = 0; s < 3; ++s) {
    const Eigen::VectorXd lhs = trace_decompose(fg, basis, s);
    const Eigen::VectorXd rhs = trace_decompose(f, basis, s) + 2.5 * trace_decompose(g, basis, s);
    EXPECT_NEAR((lhs - rhs).norm(), 0.0, 1e-13);
  }
}

// Closed form against quadrature for random trigonometric integrands.
TEST(Channels, ClosedFormMatchesQuadrature) {
  const auto basis = channel_basis(builtin_example());
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    TrigSeries f;
    for (int k = 0; k < 3; ++k) f.terms.push_back({u(rng), 6.0 * u(rng), 3.0 * u(rng)});
    const int s = trial % 3;
    const Eigen::VectorXd c = trace_decompose(f, basis, s);
    const Eigen::VectorXd q = trace_decompose(std::function<double(double)>(f), basis, s, 256);
    EXPECT_NEAR((c - q).norm(), 0.0, 1e-10);
  }
}
