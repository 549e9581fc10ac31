#pragma once
// Reference computations that avoid the Schur reduction and the pole model.
//
// mode_match_smatrix solves trace/derivative continuity on every retained
// channel at once: with u the outgoing amplitudes (open: e^{ipx}, closed:
// e^{-κx}) and Π = diag(p, iκ),
//     (iΠ - DN) u = (DN + iΠ) e_in,
// one right-hand side per incident open channel.

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "qjunction/channels.hpp"
#include "qjunction/dn_map.hpp"
#include "qjunction/error.hpp"
#include "qjunction/quadrature.hpp"
#include "qjunction/scattering.hpp"

namespace qjunction::oracle {

struct FullSystem {
  double lambda = 0.0;
  Eigen::MatrixXcd matrix;  // (n L_max) square
  Eigen::MatrixXcd rhs;     // n columns
};

inline FullSystem assemble(double lambda, const SpectralData& d) {
  const auto& basis = d.basis;
  const int m = basis.size();
  const int n = basis.open_count();
  Eigen::VectorXcd pi(m);
  for (int c = 0; c < m; ++c) pi[c] = momentum(lambda, basis.mode(c).threshold);
  const Eigen::MatrixXcd dn = dn_full(lambda, d).matrix;
  const cplx i1(0.0, 1.0);
  FullSystem sys;
  sys.lambda = lambda;
  sys.matrix = -dn;
  sys.matrix.diagonal() += i1 * pi;
  sys.rhs = dn.leftCols(n);
  for (int j = 0; j < n; ++j) sys.rhs(j, j) += i1 * pi[j];
  return sys;
}

/// S on the open channels from the full truncated channel system, flux-normalized.
inline SMatrix mode_match_smatrix(double lambda, const SpectralData& d) {
  const auto& basis = d.basis;
  if (!basis.inside_band(lambda))
    throw NumericalError("lambda = " + std::to_string(lambda) + " is outside the open band");
  const FullSystem sys = assemble(lambda, d);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(sys.matrix);
  if (!(lu.rcond() > 1e-15)) throw SingularSystemError("mode-matching system is singular");
  const Eigen::MatrixXcd u = lu.solve(sys.rhs);
  const int n = basis.open_count();
  SMatrix s{lambda, open_momenta(basis, lambda), {}};
  const Eigen::VectorXd root = s.p.cwiseSqrt();
  s.matrix = root.cast<cplx>().asDiagonal() * u.topRows(n) * root.cwiseInverse().cast<cplx>().asDiagonal();
  return s;
}

/// Composite Gauss-Legendre value of \int_a^b f g.
inline double overlap_quadrature(const std::function<double(double)>& f, const std::function<double(double)>& g,
                                 double a, double b, int n_points) {
  if (n_points < 16) throw std::invalid_argument("overlap_quadrature: need at least 16 points");
  return gauss_legendre([&](double t) { return f(t) * g(t); }, a, b, n_points);
}

}  // namespace qjunction::oracle
