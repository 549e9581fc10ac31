#pragma once
// Transverse wire modes and the open/closed channel split.
//
// Channel ordering used by every matrix in the library: the n open channels
// (one per wire, l = 1) come first, then the closed channels wire-major,
// l = 2..L_max within each wire.
//
// Mode profile on a segment [o, o+d] of a side with coordinate t:
//     e_l(t) = sqrt(2/d) * sin(pi*l*y/d),   y = t - (o + d) in (-d, 0),
// i.e. y is measured from the far end of the segment. With this orientation the
// l = 1 profile is the negative lobe, e.g. (2/sqrt(pi)) sin 2t on (pi/2, pi).

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qjunction/error.hpp"
#include "qjunction/junction.hpp"
#include "qjunction/quadrature.hpp"

namespace qjunction {

using cplx = std::complex<double>;

struct TransverseMode {
  int wire = 0;  // 0-based wire position
  int l = 1;
  double threshold = 0.0;
  double width = 1.0;
  double far_end = 1.0;  // o + d along the side coordinate
  Side side = Side::left;

  double operator()(double t) const {
    return std::sqrt(2.0 / width) * std::sin(std::numbers::pi * l * (t - far_end) / width);
  }
  double segment_begin() const { return far_end - width; }
};

class ChannelBasis {
 public:
  ChannelBasis() = default;
  ChannelBasis(std::vector<TransverseMode> modes, int wires, int l_max)
      : modes_(std::move(modes)), wires_(wires), l_max_(l_max) {}

  int wire_count() const { return wires_; }
  int l_max() const { return l_max_; }
  int size() const { return static_cast<int>(modes_.size()); }
  int open_count() const { return wires_; }
  int closed_count() const { return wires_ * (l_max_ - 1); }

  /// Global channel index of mode l on wire s (0-based wire).
  int index(int wire, int l) const {
    if (l == 1) return wire;
    return wires_ + wire * (l_max_ - 1) + (l - 2);
  }
  const TransverseMode& mode(int global) const { return modes_[global]; }
  const TransverseMode& mode(int wire, int l) const { return modes_[index(wire, l)]; }
  const std::vector<TransverseMode>& modes() const { return modes_; }

  /// (highest first threshold, lowest second threshold) over the wires.
  std::pair<double, double> band() const {
    double lo = -HUGE_VAL, hi = HUGE_VAL;
    for (int s = 0; s < wires_; ++s) {
      lo = std::max(lo, mode(s, 1).threshold);
      hi = std::min(hi, mode(s, 2).threshold);
    }
    return {lo, hi};
  }
  bool inside_band(double lambda) const {
    auto [lo, hi] = band();
    return lambda > lo && lambda < hi;
  }
  /// True when every wire has the same first threshold (scalar open momentum).
  bool uniform_open_threshold() const {
    for (int s = 1; s < wires_; ++s)
      if (mode(s, 1).threshold != mode(0, 1).threshold) return false;
    return true;
  }

 private:
  std::vector<TransverseMode> modes_;
  int wires_ = 0;
  int l_max_ = 2;
};

/// Channel momentum: +sqrt(λ-τ) above threshold, i*sqrt(τ-λ) below.
inline cplx momentum(double lambda, double tau) {
  if (lambda > tau) return {std::sqrt(lambda - tau), 0.0};
  if (lambda < tau) return {0.0, std::sqrt(tau - lambda)};
  return {0.0, 0.0};
}

/// Complex λ: the branch with Im p >= 0, continuous from the upper half plane.
inline cplx momentum(cplx lambda, double tau) {
  if (lambda.imag() == 0.0) return momentum(lambda.real(), tau);
  cplx p = std::sqrt(lambda - tau);
  return p.imag() < 0.0 ? -p : p;
}

inline double mode_threshold(int l, double width, double q_inf) {
  const double k = std::numbers::pi * l / width;
  return k * k + q_inf;
}

inline ChannelBasis channel_basis(const JunctionSpec& spec) {
  const int n = spec.wire_count();
  const int lmax = spec.solver.closed_modes;
  if (n < 1) throw ConfigError("wires", "at least one wire is required");
  if (lmax < 2) throw ConfigError("solver.closed_modes", "closed_modes must be >= 2");
  std::vector<TransverseMode> modes(static_cast<std::size_t>(n * lmax));
  ChannelBasis layout({}, n, lmax);
  for (int s = 0; s < n; ++s) {
    const auto& w = spec.wires[s];
    for (int l = 1; l <= lmax; ++l) {
      modes[layout.index(s, l)] =
          TransverseMode{s, l, mode_threshold(l, w.width, w.q_inf), w.width, w.segment_end(), w.side};
    }
  }
  ChannelBasis basis(std::move(modes), n, lmax);
  auto [lo, hi] = basis.band();
  if (!(lo < hi))
    throw NumericalError("open band is empty: highest first threshold " + std::to_string(lo) +
                         " >= lowest second threshold " + std::to_string(hi));
  return basis;
}

/// κ on the closed channels (closed-block order): κ = sqrt(τ - λ) > 0.
inline Eigen::VectorXd k_minus(const ChannelBasis& basis, double lambda) {
  Eigen::VectorXd kappa(basis.closed_count());
  for (int c = 0; c < basis.closed_count(); ++c) {
    const auto& m = basis.mode(basis.open_count() + c);
    if (!(lambda < m.threshold))
      throw NumericalError("lambda = " + std::to_string(lambda) + " is not below closed threshold " +
                           std::to_string(m.threshold) + " (wire " + std::to_string(m.wire + 1) +
                           ", l = " + std::to_string(m.l) + "); increase closed_modes");
    kappa[c] = std::sqrt(m.threshold - lambda);
  }
  return kappa;
}

/// Sum of terms amplitude * sin(k t + phase) in the side coordinate t.
struct TrigSeries {
  struct Term {
    double amplitude;
    double k;
    double phase;
  };
  std::vector<Term> terms;

  double operator()(double t) const {
    double v = 0.0;
    for (const auto& term : terms) v += term.amplitude * std::sin(term.k * t + term.phase);
    return v;
  }
};

/// \int_segment amplitude*sin(k t + phase) * e_l(t) dt in closed form.
inline double sine_mode_overlap(double amplitude, double k, double phase, const TransverseMode& m) {
  const double q = std::numbers::pi * m.l / m.width;
  const double c = -q * m.far_end;
  const double t0 = m.segment_begin(), t1 = m.far_end;
  // sin(A) sin(B) = [cos(A - B) - cos(A + B)] / 2
  const double diff = integral_cos(k - q, phase - c, t0, t1);
  const double sum = integral_cos(k + q, phase + c, t0, t1);
  return amplitude * std::sqrt(2.0 / m.width) * 0.5 * (diff - sum);
}

/// Mode coefficients c_l = \int f e_l over one wire's segment (closed form).
inline Eigen::VectorXd trace_decompose(const TrigSeries& f, const ChannelBasis& basis, int wire) {
  Eigen::VectorXd c(basis.l_max());
  for (int l = 1; l <= basis.l_max(); ++l) {
    double v = 0.0;
    for (const auto& term : f.terms) v += sine_mode_overlap(term.amplitude, term.k, term.phase, basis.mode(wire, l));
    c[l - 1] = v;
  }
  return c;
}

/// Same, for an arbitrary integrand, by composite Gauss-Legendre quadrature.
inline Eigen::VectorXd trace_decompose(const std::function<double(double)>& f,
                                       const ChannelBasis& basis, int wire, int quadrature_points) {
  Eigen::VectorXd c(basis.l_max());
  for (int l = 1; l <= basis.l_max(); ++l) {
    const auto& m = basis.mode(wire, l);
    c[l - 1] = gauss_legendre([&](double t) { return f(t) * m(t); }, m.segment_begin(), m.far_end,
                              quadrature_points);
  }
  return c;
}

}  // namespace qjunction
