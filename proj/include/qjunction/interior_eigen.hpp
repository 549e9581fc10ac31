#pragma once
// Dirichlet eigenpairs of -Δ + <field, x> on the rectangular well, and their
// boundary currents: channel coefficients of the outward normal derivative on
// the attachment segments.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qjunction/channels.hpp"
#include "qjunction/error.hpp"
#include "qjunction/junction.hpp"
#include "qjunction/quadrature.hpp"

namespace qjunction {

/// Φ = (2/sqrt(ab)) sin(mπx/a) sin(nπy/b).
struct AnalyticMode {
  int m = 1;
  int n = 1;
};

/// Eigenvector of the 5-point discretization, values at interior nodes
/// (i = 1..nx-1, j = 1..ny-1) stored as values(i-1, j-1); normalized so that
/// sum(values^2) * hx * hy = 1.
struct GridFunction {
  std::shared_ptr<const Eigen::MatrixXd> values;
  double hx = 0.0;
  double hy = 0.0;
  int nx = 0;  // intervals along x1
  int ny = 0;  // intervals along x2
};

struct InteriorEigenpair {
  double lambda = 0.0;
  std::variant<AnalyticMode, GridFunction> rep;
  int group = 0;  // pairs with equal eigenvalue share a group id
  double a = 0.0;
  double b = 0.0;

  bool analytic() const { return std::holds_alternative<AnalyticMode>(rep); }
};

struct EigenList {
  std::vector<InteriorEigenpair> pairs;
  bool truncated = false;
};

namespace detail {

inline void assign_groups(std::vector<InteriorEigenpair>& pairs, double rel_tol) {
  int group = -1;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i == 0 || std::abs(pairs[i].lambda - pairs[i - 1].lambda) >
                      rel_tol * std::max(1.0, std::abs(pairs[i].lambda)))
      ++group;
    pairs[i].group = group;
  }
}

}  // namespace detail

/// All analytic eigenvalues m²π²/a² + n²π²/b² in the open window (lo, hi),
/// ascending (ties ordered by m), capped at max_count.
inline EigenList rect_eigenpairs(const WellSpec& well, double lo, double hi, int max_count) {
  if (well.has_field())
    throw ConfigError("well.field", "rect_eigenpairs needs a zero field; use fd_eigenpairs");
  const double kx = std::numbers::pi / well.width_a;
  const double ky = std::numbers::pi / well.height_b;
  std::vector<std::tuple<double, int, int>> found;
  for (int m = 1; kx * kx * m * m + ky * ky < hi; ++m) {
    for (int n = 1;; ++n) {
      const double lambda = kx * kx * m * m + ky * ky * n * n;
      if (!(lambda < hi)) break;
      if (lambda > lo) found.emplace_back(lambda, m, n);
    }
  }
  std::sort(found.begin(), found.end());
  EigenList out;
  for (const auto& [lambda, m, n] : found) {
    if (static_cast<int>(out.pairs.size()) == max_count) {
      out.truncated = true;
      break;
    }
    out.pairs.push_back({lambda, AnalyticMode{m, n}, 0, well.width_a, well.height_b});
  }
  detail::assign_groups(out.pairs, 1e-12);
  return out;
}

/// The `count` lowest analytic eigenpairs.
inline std::vector<InteriorEigenpair> lowest_rect_eigenpairs(const WellSpec& well, int count) {
  const double kx = std::numbers::pi / well.width_a;
  const double ky = std::numbers::pi / well.height_b;
  double hi = 2.0 * (kx * kx + ky * ky);
  for (;;) {
    auto list = rect_eigenpairs(well, 0.0, hi, count);
    if (list.truncated) return std::move(list.pairs);
    hi *= 2.0;
  }
}

/// Lowest `count` eigenpairs of the 5-point discretization of -Δ + <field,x>
/// with Dirichlet walls. The linear potential separates, so the discrete
/// operator is a Kronecker sum of two tridiagonal matrices and its eigenpairs
/// are sums/products of 1-D ones.
inline std::vector<InteriorEigenpair> fd_eigenpairs(const WellSpec& well, double h, int count) {
  const int nx = static_cast<int>(std::lround(well.width_a / h));
  const int ny = static_cast<int>(std::lround(well.height_b / h));
  if (nx < 16 || ny < 16)
    throw ConfigError("solver.grid", "grid step " + std::to_string(h) +
                                         " gives fewer than 16 intervals per side");
  const double hx = well.width_a / nx;
  const double hy = well.height_b / ny;

  auto solve_1d = [](int intervals, double step, double slope) {
    const int n = intervals - 1;
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
    for (int i = 0; i < n; ++i) diag[i] = 2.0 / (step * step) + slope * (i + 1) * step;
    sub.setConstant(-1.0 / (step * step));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
      throw NumericalError("tridiagonal eigensolver did not converge within its QL iteration budget (" +
                           std::to_string(30 * n) + " sweeps)");
    Eigen::MatrixXd vecs = es.eigenvectors() / std::sqrt(step);
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        if (std::abs(vecs(i, k)) > 1e-8) {
          if (vecs(i, k) < 0.0) vecs.col(k) *= -1.0;
          break;
        }
      }
    }
    return std::pair<Eigen::VectorXd, Eigen::MatrixXd>{es.eigenvalues(), vecs};
  };
  auto [mu, ux] = solve_1d(nx, hx, well.field[0]);
  auto [nu, vy] = solve_1d(ny, hy, well.field[1]);

  std::vector<std::tuple<double, int, int>> sums;
  const int kmax = std::min<int>(static_cast<int>(mu.size()), count);
  const int jmax = std::min<int>(static_cast<int>(nu.size()), count);
  for (int i = 0; i < kmax; ++i)
    for (int j = 0; j < jmax; ++j) sums.emplace_back(mu[i] + nu[j], i, j);
  std::sort(sums.begin(), sums.end());
  if (static_cast<int>(sums.size()) > count) sums.resize(count);

  std::vector<InteriorEigenpair> out;
  for (const auto& [lambda, i, j] : sums) {
    auto values = std::make_shared<Eigen::MatrixXd>(ux.col(i) * vy.col(j).transpose());
    out.push_back({lambda, GridFunction{values, hx, hy, nx, ny}, 0, well.width_a, well.height_b});
  }
  detail::assign_groups(out, 1e-9);
  return out;
}

namespace detail {

/// Outward normal derivative of an analytic mode along `side`, as a sine in
/// the side coordinate.
inline TrigSeries analytic_normal_derivative(const InteriorEigenpair& pair, Side side) {
  const auto mode = std::get<AnalyticMode>(pair.rep);
  const double c = 2.0 / std::sqrt(pair.a * pair.b);
  const double kx = std::numbers::pi * mode.m / pair.a;
  const double ky = std::numbers::pi * mode.n / pair.b;
  const double sign_m = (mode.m % 2 == 0) ? 1.0 : -1.0;  // cos(mπ)
  const double sign_n = (mode.n % 2 == 0) ? 1.0 : -1.0;
  switch (side) {
    case Side::left: return {{{-c * kx, ky, 0.0}}};
    case Side::right: return {{{c * kx * sign_m, ky, 0.0}}};
    case Side::bottom: return {{{-c * ky, kx, 0.0}}};
    case Side::top: return {{{c * ky * sign_n, kx, 0.0}}};
  }
  return {};
}

/// Outward normal derivative of a grid eigenvector at the boundary nodes of
/// `side` (node k at side coordinate k*h), by the one-sided second-order
/// difference (-3u0 + 4u1 - u2)/(2h) with u0 = 0.
inline std::vector<double> grid_normal_derivative(const GridFunction& g, Side side) {
  const auto& u = *g.values;
  const bool vertical = side == Side::left || side == Side::right;
  const int nodes = (vertical ? g.ny : g.nx) + 1;
  const double h = vertical ? g.hx : g.hy;
  std::vector<double> d(nodes, 0.0);
  for (int k = 1; k + 1 < nodes; ++k) {
    double u1 = 0.0, u2 = 0.0;
    switch (side) {
      case Side::left: u1 = u(0, k - 1); u2 = u(1, k - 1); break;
      case Side::right: u1 = u(g.nx - 2, k - 1); u2 = u(g.nx - 3, k - 1); break;
      case Side::bottom: u1 = u(k - 1, 0); u2 = u(k - 1, 1); break;
      case Side::top: u1 = u(k - 1, g.ny - 2); u2 = u(k - 1, g.ny - 3); break;
    }
    // Outward normal points away from the interior on every side, so the
    // derivative along it is -(4u1 - u2)/(2h) in terms of the inward samples.
    d[k] = -(4.0 * u1 - u2) / (2.0 * h);
  }
  return d;
}

}  // namespace detail

/// Coefficients of ∂Φ/∂n (outward) against every channel mode, in global
/// channel order.
inline Eigen::VectorXd boundary_current(const InteriorEigenpair& pair, const ChannelBasis& basis,
                                        int quadrature_points = 256) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.size());
  for (int s = 0; s < basis.wire_count(); ++s) {
    const Side side = basis.mode(s, 1).side;
    Eigen::VectorXd c;
    if (pair.analytic()) {
      c = trace_decompose(detail::analytic_normal_derivative(pair, side), basis, s);
    } else {
      const auto& g = std::get<GridFunction>(pair.rep);
      const auto samples = detail::grid_normal_derivative(g, side);
      const double h = (side == Side::left || side == Side::right) ? g.hy : g.hx;
      auto interp = [&](double t) {
        const double x = t / h;
        const int k = std::clamp(static_cast<int>(std::floor(x)), 0, static_cast<int>(samples.size()) - 2);
        const double w = x - k;
        return (1.0 - w) * samples[k] + w * samples[k + 1];
      };
      c = trace_decompose(interp, basis, s, quadrature_points);
    }
    for (int l = 1; l <= basis.l_max(); ++l) out[basis.index(s, l)] = c[l - 1];
  }
  return out;
}

}  // namespace qjunction
