#pragma once
// Scattering matrices on the first open band.
//
// Wire Ansatz (x > 0 runs away from the well): e^{-ipx} in + e^{ipx} S in.
// Matching value and outward derivative at the segment gives
//     S = (iP - DN^F)⁻¹ (iP + DN^F),   P = diag(p_s),
// which is returned flux-normalized, P^{1/2} S P^{-1/2} (a no-op for equal
// wires).

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "qjunction/channels.hpp"
#include "qjunction/dn_map.hpp"
#include "qjunction/error.hpp"

namespace qjunction {

struct SMatrix {
  double lambda = 0.0;
  Eigen::VectorXd p;  // open-channel momentum per wire
  Eigen::MatrixXcd matrix;
};

/// Open-channel momenta sqrt(λ - τ_{s,1}); λ must lie above every first threshold.
inline Eigen::VectorXd open_momenta(const ChannelBasis& basis, double lambda) {
  Eigen::VectorXd p(basis.open_count());
  for (int s = 0; s < basis.open_count(); ++s) {
    const double tau = basis.mode(s, 1).threshold;
    if (!(lambda > tau))
      throw NumericalError("lambda = " + std::to_string(lambda) + " is not above the first threshold of wire " +
                           std::to_string(s + 1));
    p[s] = std::sqrt(lambda - tau);
  }
  return p;
}

inline double unitarity_defect(const Eigen::MatrixXcd& s) {
  return (s.adjoint() * s - Eigen::MatrixXcd::Identity(s.rows(), s.cols())).norm();
}

inline double reciprocity_defect(const Eigen::MatrixXcd& s) { return (s - s.transpose()).norm(); }

/// Cayley form with per-wire momenta, flux-normalized.
inline Eigen::MatrixXcd cayley(const Eigen::MatrixXcd& dnF, const Eigen::VectorXd& p) {
  if (!dnF.allFinite()) throw NumericalError("DN^F is not finite (pole on the real axis)");
  const Eigen::VectorXd root = p.cwiseSqrt();
  const Eigen::VectorXd inv_root = root.cwiseInverse();
  // B = P^{-1/2} DN^F P^{-1/2};  S̃ = (i - B)⁻¹ (i + B).
  const Eigen::MatrixXcd b = inv_root.cast<cplx>().asDiagonal() * dnF * inv_root.cast<cplx>().asDiagonal();
  const cplx i1(0.0, 1.0);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(b.rows(), b.cols());
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(i1 * id - b);
  if (!(lu.rcond() > 1e-15)) throw SingularSystemError("scattering denominator iP - DN^F is singular");
  return lu.solve(i1 * id + b);
}

inline SMatrix s_exact(const Eigen::MatrixXcd& dnF, double lambda, const ChannelBasis& basis) {
  if (!basis.inside_band(lambda))
    throw NumericalError("lambda = " + std::to_string(lambda) + " is outside the open band");
  SMatrix s{lambda, open_momenta(basis, lambda), {}};
  s.matrix = cayley(dnF, s.p);
  return s;
}

/// Full pipeline at one energy: DN series, Schur complement, Cayley form.
inline SMatrix s_exact(double lambda, const SpectralData& d) {
  return s_exact(intermediate_dn(lambda, d).matrix, lambda, d.basis);
}

/// Θ(λ) = (ip(λ-λ0F) + α²)/(ip(λ-λ0F) - α²).
inline cplx theta(double p, double alpha2, double lambda0F, double lambda) {
  const cplx x(0.0, p * (lambda - lambda0F));
  if (alpha2 == 0.0) return 1.0;
  return (x + alpha2) / (x - alpha2);
}

inline cplx theta(const SinglePoleModel& model, double p, double lambda) {
  return theta(p, model.alpha * model.alpha, model.lambda0F, lambda);
}

inline cplx theta(const SinglePoleModel& model, const ChannelBasis& basis, double lambda) {
  if (!basis.uniform_open_threshold())
    throw std::invalid_argument("theta: wires have different open momenta; use s_approx");
  return theta(model, open_momenta(basis, lambda)[0], lambda);
}

/// S = P0⊥ + Σ_j Θ_j P_j over the residue's eigencomponents (one term,
/// P0⊥ + Θ P0, for a rank-1 resonance). With unequal wires the Cayley form of
/// the polar term is used instead.
inline SMatrix s_approx(const SinglePoleModel& model, const ChannelBasis& basis, double lambda) {
  SMatrix s{lambda, open_momenta(basis, lambda), {}};
  const int n = basis.open_count();
  if (basis.uniform_open_threshold()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.residue);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(n, n);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    for (int j = 0; j < n; ++j) {
      const double a2 = es.eigenvalues()[j];
      if (!(a2 > 1e-10 * top)) continue;
      const Eigen::VectorXd e = es.eigenvectors().col(j);
      const Eigen::MatrixXcd pj = (e * e.transpose()).cast<cplx>();
      out += (theta(s.p[0], a2, model.lambda0F, lambda) - 1.0) * pj;
    }
    s.matrix = out;
  } else {
    if (lambda == model.lambda0F) throw NumericalError("s_approx: lambda at the pole with unequal wires");
    s.matrix = cayley(model.residue.cast<cplx>() / (lambda - model.lambda0F), s.p);
  }
  return s;
}

inline Eigen::MatrixXd transmission(const SMatrix& s) { return s.matrix.cwiseAbs2(); }

enum class SweepMethod { exact, pole };

struct SweepRow {
  double lambda = 0.0;
  SMatrix s;
  Eigen::MatrixXd t;
  double unitarity = 0.0;
  bool flagged = false;
  std::string note;
};

struct SweepResult {
  SweepMethod method = SweepMethod::exact;
  std::vector<SweepRow> rows;
};

/// Evaluates the chosen method on every grid point. Singular points are
/// flagged, never fatal. Rows keep grid order whatever the thread count.
inline SweepResult sweep(const SpectralData& d, const std::vector<double>& grid, SweepMethod method,
                         const SinglePoleModel* model = nullptr, int threads = 1) {
  if (method == SweepMethod::pole && model == nullptr)
    throw std::invalid_argument("sweep: pole method needs a fitted model");
  SweepResult result{method, std::vector<SweepRow>(grid.size())};
  const int n = d.basis.open_count();
  auto evaluate = [&](std::size_t i) {
    SweepRow& row = result.rows[i];
    row.lambda = grid[i];
    try {
      bool near_threshold = false;
      for (const auto& m : d.basis.modes())
        near_threshold = near_threshold || std::abs(grid[i] - m.threshold) < 1e-8;
      if (near_threshold) throw NumericalError("within 1e-8 of a channel threshold");
      row.s = method == SweepMethod::exact ? s_exact(grid[i], d) : s_approx(*model, d.basis, grid[i]);
      if (!row.s.matrix.allFinite()) throw NumericalError("non-finite S");
      row.t = transmission(row.s);
      row.unitarity = unitarity_defect(row.s.matrix);
    } catch (const std::exception& e) {
      row.flagged = true;
      row.note = e.what();
      row.s.lambda = grid[i];
      row.s.p = Eigen::VectorXd::Constant(n, std::nan(""));
      for (int s = 0; s < n; ++s) {
        const double tau = d.basis.mode(s, 1).threshold;
        if (grid[i] > tau) row.s.p[s] = std::sqrt(grid[i] - tau);
      }
      row.s.matrix = Eigen::MatrixXcd::Constant(n, n, cplx(std::nan(""), std::nan("")));
      row.t = Eigen::MatrixXd::Constant(n, n, std::nan(""));
      row.unitarity = std::nan("");
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, grid.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) evaluate(i);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < grid.size(); i += workers) evaluate(i);
      });
  }
  return result;
}

}  // namespace qjunction
