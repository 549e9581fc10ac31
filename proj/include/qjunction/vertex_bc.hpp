#pragma once
// Vertex conditions A ψ = B ψ' equivalent to a scattering matrix, the
// low-temperature projector limit, and the weighted-continuity (β) family.

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "qjunction/channels.hpp"
#include "qjunction/dn_map.hpp"
#include "qjunction/error.hpp"
#include "qjunction/scattering.hpp"

namespace qjunction {

/// A ψ = B ψ' with ψ the wire limit values at the vertex. With S built for
/// e^{-ipx} in + e^{ipx} S in (x running away from the vertex), the form
/// A = iP(I - S), B = I + S holds for ψ' the derivative toward the vertex,
/// -dψ/dx. Projector conditions are insensitive to that sign.
struct VertexBC {
  double lambda = 0.0;
  Eigen::MatrixXcd A;
  Eigen::MatrixXcd B;

  int rank() const {
    Eigen::MatrixXcd ab(A.rows(), A.cols() + B.cols());
    ab << A, B;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(ab);
    qr.setThreshold(1e-10);
    return static_cast<int>(qr.rank());
  }
};

/// Qpsi ψ = 0 and Qd ψ' = 0.
struct ProjectorBC {
  Eigen::MatrixXd Qpsi;
  Eigen::MatrixXd Qd;
};

struct FermiWindow {
  double lambdaF = 0.0;
  double halfwidth = 0.0;
};

/// A = iP(I - S), B = I + S (P = diag of open momenta).
inline VertexBC bc_from_smatrix(const SMatrix& s) {
  const int n = static_cast<int>(s.matrix.rows());
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  VertexBC bc;
  bc.lambda = s.lambda;
  bc.A = cplx(0.0, 1.0) * s.p.cast<cplx>().asDiagonal() * (id - s.matrix);
  bc.B = id + s.matrix;
  return bc;
}

/// Which projector constrains ψ in the reduced condition.
enum class ProjectorAssignment {
  derived,        // S → P0⊥ - P0 through A ψ = B ψ' gives P0 ψ = 0, P0⊥ ψ' = 0
  paper_labeled,  // the swapped labeling P0⊥ ψ = 0, P0 ψ' = 0
};

struct LowTempResult {
  ProjectorBC projectors;
  bool valid = false;
  double max_theta_defect = 0.0;  // max over the window of |Θ + 1|
  double margin = 0.0;            // tol - max_theta_defect
};

/// Checks that Θ stays within `tol` of -1 across the Fermi window; the
/// projector pair then follows from S_limit = I - 2 P0: ψ is constrained by the
/// projector onto range(I - S_limit).
inline LowTempResult low_temp_limit(const SinglePoleModel& model, const ChannelBasis& basis,
                                    const FermiWindow& window, double tol,
                                    ProjectorAssignment assign = ProjectorAssignment::derived) {
  if (window.halfwidth < 0.0) throw std::invalid_argument("low_temp_limit: negative halfwidth");
  const double lo = window.lambdaF - window.halfwidth;
  const double hi = window.lambdaF + window.halfwidth;
  if (!basis.inside_band(lo) || !basis.inside_band(hi))
    throw NumericalError("Fermi window leaves the open band");
  LowTempResult out;
  constexpr int samples = 257;
  const double a2 = model.alpha * model.alpha;
  for (int i = 0; i < samples; ++i) {
    const double lambda = window.halfwidth == 0.0 ? window.lambdaF : lo + (hi - lo) * i / (samples - 1);
    const double p = open_momenta(basis, lambda).minCoeff();
    out.max_theta_defect = std::max(out.max_theta_defect, std::abs(theta(p, a2, model.lambda0F, lambda) + 1.0));
    if (window.halfwidth == 0.0) break;
  }
  out.valid = out.max_theta_defect <= tol;
  out.margin = tol - out.max_theta_defect;
  const int n = static_cast<int>(model.P0.rows());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd s_limit = id - 2.0 * model.P0;
  const Eigen::MatrixXd range_proj = 0.5 * (id - s_limit);  // = P0
  out.projectors = assign == ProjectorAssignment::derived ? ProjectorBC{range_proj, id - range_proj}
                                                          : ProjectorBC{id - range_proj, range_proj};
  return out;
}

/// P0 = e eᵀ, e = (β, 1, 1)/sqrt(β² + 2), with the pair P0⊥ ψ = 0, P0 ψ' = 0.
inline ProjectorBC datta_projector(double beta, int n = 3) {
  if (beta == 0.0 || !std::isfinite(beta))
    throw std::invalid_argument("datta_projector: beta must be finite and nonzero");
  if (n < 2) throw std::invalid_argument("datta_projector: need at least two wires");
  Eigen::VectorXd e = Eigen::VectorXd::Ones(n);
  e[0] = beta;
  e /= std::sqrt(beta * beta + (n - 1));
  const Eigen::MatrixXd p0 = e * e.transpose();
  return {Eigen::MatrixXd::Identity(n, n) - p0, p0};
}

/// Recovers β from a unit vector of the form ±(β, 1, ..., 1)/norm.
inline double beta_from_vector(const Eigen::VectorXd& e0, double tol = 1e-9) {
  if (e0.size() < 2) throw std::invalid_argument("beta_from_vector: need at least two components");
  if (std::abs(e0.norm() - 1.0) > 1e-8) throw std::invalid_argument("beta_from_vector: vector is not normalized");
  Eigen::VectorXd e = e0;
  if (e[1] < 0.0) e = -e;
  for (Eigen::Index i = 2; i < e.size(); ++i)
    if (std::abs(e[i] - e[1]) > tol)
      throw std::domain_error("asymmetric: components 2.." + std::to_string(e.size()) +
                              " differ, not a symmetric (beta, 1, 1) vertex");
  if (e[1] <= tol) throw std::domain_error("asymmetric: wires 2.. decoupled (beta unbounded)");
  return e[0] / e[1];
}

/// Leading eigenvector of a symmetric projector.
inline Eigen::VectorXd leading_eigenvector(const Eigen::MatrixXd& p0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p0);
  return es.eigenvectors().col(p0.rows() - 1);
}

/// S = I - 2 P0 for a symmetric idempotent P0.
inline SMatrix datta_smatrix(const Eigen::MatrixXd& p0, double tol = 1e-10) {
  const Eigen::Index n = p0.rows();
  if (p0.cols() != n || (p0 - p0.transpose()).norm() > tol || (p0 * p0 - p0).norm() > tol)
    throw std::invalid_argument("datta_smatrix: input is not a symmetric projector");
  SMatrix s;
  s.lambda = std::nan("");
  s.p = Eigen::VectorXd::Constant(n, std::nan(""));
  s.matrix = (Eigen::MatrixXd::Identity(n, n) - 2.0 * p0).cast<cplx>();
  return s;
}

}  // namespace qjunction
