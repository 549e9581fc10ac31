#pragma once
// Dirichlet-to-Neumann map of the well built from its truncated spectral series
//
//     DN(λ) = Σ_s φ_s φ_sᵀ / (λ - λ_s),
//
// where φ_s are boundary currents (outward normal), the Schur complement onto
// the open channels
//
//     DN^F = DN₊₊ - DN₊₋ D⁻¹ DN₋₊,   D = DN₋₋ + diag(κ),
//
// and the single-pole resonance model fitted to a pole of DN^F.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

#include "qjunction/channels.hpp"
#include "qjunction/error.hpp"
#include "qjunction/interior_eigen.hpp"
#include "qjunction/junction.hpp"

namespace qjunction {

/// Eigen-data of the well expressed in a channel basis.
struct SpectralData {
  ChannelBasis basis;
  std::vector<InteriorEigenpair> pairs;
  Eigen::VectorXd eigenvalues;  // N
  Eigen::MatrixXd currents;     // N x channels, row s = φ_s

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

inline SpectralData spectral_data(const ChannelBasis& basis, std::vector<InteriorEigenpair> pairs,
                                  int quadrature_points = 256) {
  SpectralData d;
  d.basis = basis;
  d.pairs = std::move(pairs);
  const int n = static_cast<int>(d.pairs.size());
  d.eigenvalues.resize(n);
  d.currents.resize(n, basis.size());
  for (int s = 0; s < n; ++s) {
    d.eigenvalues[s] = d.pairs[s].lambda;
    d.currents.row(s) = boundary_current(d.pairs[s], basis, quadrature_points).transpose();
  }
  return d;
}

/// Eigenpairs per the solver configuration: analytic when no grid is given,
/// otherwise finite differences.
inline SpectralData spectral_data(const JunctionSpec& spec) {
  auto basis = channel_basis(spec);
  const auto& cfg = spec.solver;
  auto pairs = cfg.grid ? fd_eigenpairs(spec.well, *cfg.grid, cfg.interior_modes)
                        : lowest_rect_eigenpairs(spec.well, cfg.interior_modes);
  return spectral_data(basis, std::move(pairs), cfg.quadrature_points);
}

struct DNMatrix {
  cplx lambda;
  Eigen::MatrixXcd matrix;  // channels x channels, open block first
  int n_open = 0;

  int n_closed() const { return static_cast<int>(matrix.rows()) - n_open; }
  auto open_open() const { return matrix.topLeftCorner(n_open, n_open); }
  auto open_closed() const { return matrix.topRightCorner(n_open, n_closed()); }
  auto closed_open() const { return matrix.bottomLeftCorner(n_closed(), n_open); }
  auto closed_closed() const { return matrix.bottomRightCorner(n_closed(), n_closed()); }
};

/// Truncated spectral series over all retained eigenpairs.
inline DNMatrix dn_full(cplx lambda, const Eigen::VectorXd& eigenvalues, const Eigen::MatrixXd& currents,
                        const ChannelBasis& basis) {
  if (currents.rows() != eigenvalues.size() || currents.cols() != basis.size())
    throw std::invalid_argument("dn_full: eigenvalues/currents/basis sizes disagree");
  Eigen::VectorXcd weights(eigenvalues.size());
  for (Eigen::Index s = 0; s < eigenvalues.size(); ++s) {
    const cplx gap = lambda - eigenvalues[s];
    if (std::abs(gap) <= 1e-12 * std::max(1.0, std::abs(eigenvalues[s])))
      throw PoleError(eigenvalues[s], "lambda coincides with interior eigenvalue " +
                                          std::to_string(eigenvalues[s]));
    weights[s] = 1.0 / gap;
  }
  const Eigen::MatrixXcd c = currents.cast<cplx>();
  return {lambda, c.transpose() * weights.asDiagonal() * c, basis.open_count()};
}

inline DNMatrix dn_full(cplx lambda, const SpectralData& d) {
  return dn_full(lambda, d.eigenvalues, d.currents, d.basis);
}

struct IntermediateDN {
  Eigen::MatrixXcd matrix;  // on the open channels
  double d_rcond = 1.0;     // reciprocal condition estimate of D
};

/// Schur complement of the full DN onto the open channels with the closed
/// channels terminated by their decaying wire solutions.
inline IntermediateDN intermediate_dn(const DNMatrix& dn, const Eigen::VectorXd& kappa) {
  if (kappa.size() != dn.n_closed())
    throw std::invalid_argument("intermediate_dn: kappa size does not match the closed block");
  if (dn.n_closed() == 0) return {dn.open_open(), 1.0};
  Eigen::MatrixXcd d = dn.closed_closed();
  d.diagonal() += kappa.cast<cplx>();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(d);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-15)) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(d, Eigen::ComputeFullV);
    Eigen::VectorXcd v = svd.matrixV().col(svd.matrixV().cols() - 1);
    std::vector<double> nv(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) nv[i] = v[i].real();
    throw SingularSystemError("closed-channel block D is singular (intermediate resonance at lambda = " +
                                  std::to_string(dn.lambda.real()) + ")",
                              std::move(nv), rcond);
  }
  Eigen::MatrixXcd out = dn.open_open() - dn.open_closed() * lu.solve(Eigen::MatrixXcd(dn.closed_open()));
  return {out, rcond};
}

inline IntermediateDN intermediate_dn(double lambda, const SpectralData& d) {
  return intermediate_dn(dn_full(lambda, d), k_minus(d.basis, lambda));
}

// ---------------------------------------------------------------------------
// Single-pole model.

struct SinglePoleModel {
  double lambda0 = 0.0;     // eigenvalue of the selected group
  double lambda0F = 0.0;    // pole of DN^F (renormalized resonance)
  double residual = 0.0;    // |fixed-point equation| at lambda0F
  std::vector<int> group;   // selected eigenpair indices
  int rank = 1;             // rank of the residue
  Eigen::MatrixXd residue;  // open x open, residue of DN^F at lambda0F
  Eigen::VectorXd phi0F;    // leading residue vector, residue ≈ phi0F phi0Fᵀ
  double alpha = 0.0;       // |phi0F|
  Eigen::VectorXd alpha2;   // nonzero residue eigenvalues, descending
  Eigen::MatrixXd P0;       // projector onto range(residue)
  Eigen::MatrixXd regular;  // k(lambda0F) = closed block of the regular part + diag(κ)

  // Frozen-k solution, k evaluated at lambda0 with every eigenpair of eigenvalue
  // lambda0 removed from the regular part.
  double lambda0F_linearized = 0.0;
  Eigen::MatrixXd phi0F_linearized;  // P₊Φ - K₊₋ k⁻¹ P₋Φ, one column per group member

  Eigen::VectorXd e0() const { return alpha > 0.0 ? Eigen::VectorXd(phi0F / alpha) : phi0F; }
};

struct FitOptions {
  double tolerance = 1e-10;  // required fixed-point residual
  int scan_points = 600;
  bool require_root = true;
};

namespace detail {

struct GroupSplit {
  Eigen::MatrixXd phi_plus;   // open x r
  Eigen::MatrixXd phi_minus;  // closed x r
  std::vector<int> others;    // eigenpair indices of the regular part
};

inline GroupSplit split_group(const SpectralData& d, const std::vector<int>& group) {
  const int n_open = d.basis.open_count();
  const int n_closed = d.basis.closed_count();
  GroupSplit g;
  g.phi_plus.resize(n_open, group.size());
  g.phi_minus.resize(n_closed, group.size());
  for (std::size_t j = 0; j < group.size(); ++j) {
    g.phi_plus.col(j) = d.currents.row(group[j]).head(n_open).transpose();
    g.phi_minus.col(j) = d.currents.row(group[j]).tail(n_closed).transpose();
  }
  for (int s = 0; s < d.size(); ++s)
    if (std::find(group.begin(), group.end(), s) == group.end()) g.others.push_back(s);
  return g;
}

/// Regular part Σ_{s in others} φ_s φ_sᵀ/(λ - λ_s) over all channels.
inline Eigen::MatrixXd regular_part(const SpectralData& d, const std::vector<int>& others, double lambda) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(d.basis.size(), d.basis.size());
  for (int s : others) {
    const Eigen::VectorXd phi = d.currents.row(s).transpose();
    k.noalias() += phi * phi.transpose() / (lambda - d.eigenvalues[s]);
  }
  return k;
}

inline Eigen::MatrixXd closed_regular(const SpectralData& d, const std::vector<int>& others, double lambda) {
  const int nc = d.basis.closed_count();
  Eigen::MatrixXd k = regular_part(d, others, lambda).bottomRightCorner(nc, nc);
  k.diagonal() += k_minus(d.basis, lambda);
  return k;
}

/// M(λ) = (λ - λ0) I + P₋Φᵀ k(λ)⁻¹ P₋Φ. D(λ) is singular exactly where M is.
inline Eigen::MatrixXd resonance_matrix(const SpectralData& d, const GroupSplit& g, double lambda0,
                                        double lambda) {
  const Eigen::MatrixXd k = closed_regular(d, g.others, lambda);
  Eigen::MatrixXd m = g.phi_minus.transpose() * k.ldlt().solve(g.phi_minus);
  m.diagonal().array() += lambda - lambda0;
  return 0.5 * (m + m.transpose());
}

}  // namespace detail

/// Eigenpair indices sharing the group id of eigenpair `member`.
inline std::vector<int> degenerate_group(const SpectralData& d, int member) {
  std::vector<int> out;
  for (int s = 0; s < d.size(); ++s)
    if (d.pairs[s].group == d.pairs[member].group) out.push_back(s);
  return out;
}

/// Lowest eigenpair group strictly inside the open band, if any.
inline std::optional<std::vector<int>> first_group_in_band(const SpectralData& d) {
  for (int s = 0; s < d.size(); ++s)
    if (d.basis.inside_band(d.eigenvalues[s])) return degenerate_group(d, s);
  return std::nullopt;
}

/// Locates the pole λ0F of DN^F generated by the selected group: the root of
/// det M(λ) nearest to λ0 on (band lower edge + 1e-6, λ0], then extracts the
/// exact residue of DN^F there,
///     R = Φ^F W (-C)⁻¹ Wᵀ Φ^Fᵀ,
/// with W spanning null M(λ0F), Φ^F = P₊Φ - K₊₋k⁻¹P₋Φ, V = k⁻¹P₋Φ W and
/// C = Vᵀ D'(λ0F) V. Because k depends on λ, C ≠ -I in general and the residue
/// is smaller than the frozen-k estimate Φ^F Φ^Fᵀ.
inline SinglePoleModel single_pole_fit(const SpectralData& d, const std::vector<int>& group,
                                       const FitOptions& opt = {}) {
  if (group.empty()) throw std::invalid_argument("single_pole_fit: empty group");
  const auto [band_lo, band_hi] = d.basis.band();
  const double lambda0 = d.eigenvalues[group.front()];
  for (int s : group)
    if (std::abs(d.eigenvalues[s] - lambda0) > 1e-9 * std::max(1.0, lambda0))
      throw std::invalid_argument("single_pole_fit: group members have different eigenvalues");
  if (!(lambda0 > band_lo && lambda0 < band_hi))
    throw NumericalError("resonance eigenvalue " + std::to_string(lambda0) + " is outside the open band");

  const auto g = detail::split_group(d, group);
  const int r = static_cast<int>(group.size());
  const int n_open = d.basis.open_count();
  const int n_closed = d.basis.closed_count();

  SinglePoleModel model;
  model.lambda0 = lambda0;
  model.group = group;

  // Frozen-k (linearized) solution at λ0, all eigenpairs at λ0 removed from k.
  {
    std::vector<int> at_lambda0;
    for (int s = 0; s < d.size(); ++s)
      if (std::abs(d.eigenvalues[s] - lambda0) <= 1e-9 * std::max(1.0, lambda0)) at_lambda0.push_back(s);
    const auto g0 = detail::split_group(d, at_lambda0);
    const Eigen::MatrixXd kfull = detail::regular_part(d, g0.others, lambda0);
    Eigen::MatrixXd k = kfull.bottomRightCorner(n_closed, n_closed);
    k.diagonal() += k_minus(d.basis, lambda0);
    const Eigen::MatrixXd kinv_phi = k.ldlt().solve(g.phi_minus);
    model.phi0F_linearized = g.phi_plus - kfull.topRightCorner(n_open, n_closed) * kinv_phi;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.phi_minus.transpose() * kinv_phi);
    // Roots λ = λ0 - μ; the one nearest below λ0 has the smallest positive μ.
    double shift = es.eigenvalues().maxCoeff();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i] > 0.0) shift = std::min(shift, es.eigenvalues()[i]);
    model.lambda0F_linearized = lambda0 - shift;
  }

  const double coupling = g.phi_minus.norm();
  if (coupling <= 1e-13 * std::max(1.0, d.currents.norm())) {
    // No closed-channel coupling: the pole stays at λ0 with residue P₊Φ P₊Φᵀ.
    model.lambda0F = lambda0;
    model.residual = 0.0;
    model.residue = g.phi_plus * g.phi_plus.transpose();
    model.regular = detail::closed_regular(d, g.others, lambda0);
  } else {
    auto det_m = [&](double lambda) {
      return detail::resonance_matrix(d, g, lambda0, lambda).determinant();
    };
    auto min_abs_eig = [&](double lambda) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::resonance_matrix(d, g, lambda0, lambda),
                                                        Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseAbs().minCoeff();
    };
    const double lo = band_lo + 1e-6;
    const double span = lambda0 - lo;
    // Scan downward from λ0: log-spaced near λ0 (weak coupling puts the root
    // very close), uniform further out.
    std::vector<double> xs;
    for (int i = 0; i < opt.scan_points / 2; ++i) {
      const double t = static_cast<double>(i) / (opt.scan_points / 2 - 1);
      xs.push_back(lambda0 - span * std::pow(1e-12, 1.0 - t));
    }
    for (int i = 0; i < opt.scan_points / 2; ++i)
      xs.push_back(lambda0 - span * static_cast<double>(i + 1) / (opt.scan_points / 2));
    std::sort(xs.begin(), xs.end(), std::greater<>());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::optional<double> root;
    double prev_x = xs.front();
    double prev_f = det_m(prev_x);
    for (std::size_t i = 1; i < xs.size() && !root; ++i) {
      const double x = xs[i];
      const double f = det_m(x);
      if (prev_f == 0.0) {
        root = prev_x;
      } else if (std::signbit(f) != std::signbit(prev_f)) {
        std::uintmax_t iters = 200;
        auto tol = [](double a, double b) { return std::abs(b - a) <= 4e-16 * std::max(1.0, std::abs(a)); };
        auto [a, b] = boost::math::tools::toms748_solve(det_m, x, prev_x, f, prev_f, tol, iters);
        const double cand = std::abs(det_m(a)) < std::abs(det_m(b)) ? a : b;
        // A sign change through a pole of k⁻¹ leaves M unbounded; only accept
        // genuine zeros.
        if (min_abs_eig(cand) <= 1e-6) root = cand;
      }
      prev_x = x;
      prev_f = f;
    }
    if (!root) {
      throw NumericalError("no intermediate resonance found in (" + std::to_string(lo) + ", " +
                           std::to_string(lambda0) + ")");
    }
    const double lf = *root;
    model.lambda0F = lf;

    const Eigen::MatrixXd mm = detail::resonance_matrix(d, g, lambda0, lf);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mm);
    const double scale = std::max(1.0, mm.norm());
    std::vector<int> null_cols;
    double smallest = HUGE_VAL;
    int smallest_idx = 0;
    for (int i = 0; i < r; ++i) {
      const double v = std::abs(es.eigenvalues()[i]);
      if (v < smallest) smallest = v, smallest_idx = i;
      if (v <= 1e-7 * scale) null_cols.push_back(i);
    }
    if (null_cols.empty()) null_cols.push_back(smallest_idx);
    model.residual = smallest;
    Eigen::MatrixXd w(r, null_cols.size());
    for (std::size_t j = 0; j < null_cols.size(); ++j) w.col(j) = es.eigenvectors().col(null_cols[j]);

    const Eigen::MatrixXd kfull = detail::regular_part(d, g.others, lf);
    Eigen::MatrixXd k = kfull.bottomRightCorner(n_closed, n_closed);
    const Eigen::VectorXd kappa = k_minus(d.basis, lf);
    k.diagonal() += kappa;
    model.regular = k;
    const Eigen::MatrixXd kinv_phi = k.ldlt().solve(g.phi_minus);
    const Eigen::MatrixXd phiF = g.phi_plus - kfull.topRightCorner(n_open, n_closed) * kinv_phi;
    const Eigen::MatrixXd v = kinv_phi * w;

    // D'(λ) = -Σ_s P₋φ_s P₋φ_sᵀ/(λ-λ_s)² - diag(1/(2κ)), over all eigenpairs.
    Eigen::MatrixXd dprime = Eigen::MatrixXd::Zero(n_closed, n_closed);
    for (int s = 0; s < d.size(); ++s) {
      const Eigen::VectorXd pm = d.currents.row(s).tail(n_closed).transpose();
      const double gap = lf - d.eigenvalues[s];
      dprime.noalias() -= pm * pm.transpose() / (gap * gap);
    }
    dprime.diagonal().array() -= 0.5 / kappa.array();
    const Eigen::MatrixXd c = v.transpose() * dprime * v;
    const Eigen::MatrixXd pw = phiF * w;
    model.residue = pw * (-c).ldlt().solve(pw.transpose());
  }

  model.residue = 0.5 * (model.residue + model.residue.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rs(model.residue);
  const double top = std::max(rs.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
  std::vector<int> kept;
  for (int i = n_open - 1; i >= 0; --i)
    if (rs.eigenvalues()[i] > 1e-10 * std::max(top, 1e-300)) kept.push_back(i);
  if (kept.empty() || top == 0.0) {
    model.rank = 0;
    model.alpha2 = Eigen::VectorXd();
    model.P0 = Eigen::MatrixXd::Zero(n_open, n_open);
    model.phi0F = Eigen::VectorXd::Zero(n_open);
    model.alpha = 0.0;
  } else {
    model.rank = static_cast<int>(kept.size());
    model.alpha2.resize(model.rank);
    model.P0 = Eigen::MatrixXd::Zero(n_open, n_open);
    for (int j = 0; j < model.rank; ++j) {
      const Eigen::VectorXd e = rs.eigenvectors().col(kept[j]);
      model.alpha2[j] = rs.eigenvalues()[kept[j]];
      model.P0 += e * e.transpose();
    }
    Eigen::VectorXd e = rs.eigenvectors().col(kept.front());
    // Sign gauge: largest-magnitude component positive.
    Eigen::Index imax = 0;
    e.cwiseAbs().maxCoeff(&imax);
    if (e[imax] < 0.0) e = -e;
    model.alpha = std::sqrt(model.alpha2[0]);
    model.phi0F = model.alpha * e;
  }
  if (opt.require_root && model.residual > opt.tolerance)
    throw NumericalError("resonance fixed-point residual " + std::to_string(model.residual) +
                         " exceeds tolerance");
  return model;
}

/// λ̂ solving √(τ2 - λ0)·[c + λ̂ - λ0] = 0 for a supplied constant c: the
/// frozen-coefficient scalar shift λ̂ = λ0 - c.
inline double linearized_shift(double lambda0, double constant) { return lambda0 - constant; }

struct ValidityReport {
  double rho0 = 0.0;            // min |λ0 - λ_r| over eigenpairs outside the group
  double rho0_selection = 0.0;  // same, counting unselected degenerate partners (0 if any)
  double delta_over_d = 0.0;    // widest wire / well diameter
  double k0_norm = 0.0;         // |K_0(λ0F)|₂ on the full trace space
  double dominance = 0.0;       // α² / (ρ0 |K_0|)
  bool pass = false;
  int eigenvalues_in_window = 0;
};

inline ValidityReport validity_report(const JunctionSpec& spec, const SpectralData& d,
                                      const SinglePoleModel& model, std::pair<double, double> window) {
  ValidityReport rep;
  rep.rho0 = HUGE_VAL;
  rep.rho0_selection = HUGE_VAL;
  const int group_id = d.pairs[model.group.front()].group;
  for (int s = 0; s < d.size(); ++s) {
    const double gap = std::abs(model.lambda0 - d.eigenvalues[s]);
    const bool selected = std::find(model.group.begin(), model.group.end(), s) != model.group.end();
    if (!selected) rep.rho0_selection = std::min(rep.rho0_selection, gap);
    if (d.pairs[s].group != group_id) rep.rho0 = std::min(rep.rho0, gap);
    if (d.eigenvalues[s] > window.first && d.eigenvalues[s] < window.second) ++rep.eigenvalues_in_window;
  }
  double widest = 0.0;
  for (const auto& w : spec.wires) widest = std::max(widest, w.width);
  rep.delta_over_d = widest / spec.well.diameter();
  std::vector<int> others;
  for (int s = 0; s < d.size(); ++s)
    if (std::find(model.group.begin(), model.group.end(), s) == model.group.end()) others.push_back(s);
  const Eigen::MatrixXd k0 = detail::regular_part(d, others, model.lambda0F);
  rep.k0_norm = Eigen::JacobiSVD<Eigen::MatrixXd>(k0).singularValues()(0);
  const double a2 = model.alpha * model.alpha;
  rep.dominance = (rep.rho0 > 0.0 && rep.k0_norm > 0.0) ? a2 / (rep.rho0 * rep.k0_norm) : HUGE_VAL;
  rep.pass = rep.dominance >= 1.0;
  return rep;
}

}  // namespace qjunction
