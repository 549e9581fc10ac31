// Prints the resonance model and a few S-matrix samples for the built-in
// asymmetric T-junction.
#include <cstdio>

#include "qjunction/qjunction.hpp"

int main() {
  using namespace qjunction;
  const JunctionSpec spec = builtin_example();
  const SpectralData data = spectral_data(spec);
  const auto [lo, hi] = data.basis.band();
  std::printf("open band (%g, %g)\n", lo, hi);

  const auto group = first_group_in_band(data);
  if (!group) return 1;
  const SinglePoleModel model = single_pole_fit(data, *group);
  std::printf("lambda0 = %g  lambda0F = %.12g  alpha^2 = %.6g  rank = %d\n", model.lambda0, model.lambda0F,
              model.alpha * model.alpha, model.rank);

  for (double lambda : {4.5, model.lambda0F + 1e-3, 6.0, 9.0}) {
    const SMatrix exact = s_exact(lambda, data);
    const SMatrix oracle_s = oracle::mode_match_smatrix(lambda, data);
    const Eigen::MatrixXd t = transmission(exact);
    std::printf("lambda = %-10.6g T12 = %.6f T13 = %.6f T23 = %.6f  |S - S_oracle| = %.2e\n", lambda, t(0, 1),
                t(0, 2), t(1, 2), (exact.matrix - oracle_s.matrix).norm());
  }
  return 0;
}
