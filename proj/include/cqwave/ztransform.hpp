#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "cqwave/contour.hpp"
#include "cqwave/dft.hpp"
#include "cqwave/diagnostics.hpp"
#include "cqwave/errors.hpp"

namespace cqwave {

/// Samples x_n, n = 0..size-1, of a causal sequence; later samples are implicitly zero.
struct TimeSignal {
  std::vector<cplx> values;
  double dt = 1.0;
  std::string tag = "scalar";

  TimeSignal() = default;
  TimeSignal(std::vector<cplx> v, double step, std::string t = "scalar")
      : values(std::move(v)), dt(step), tag(std::move(t)) {
    if (values.empty()) throw InvalidArgument("time signal needs at least one sample");
  }
  static TimeSignal from_real(std::span<const double> v, double step, std::string t = "scalar") {
    return TimeSignal(std::vector<cplx>(v.begin(), v.end()), step, std::move(t));
  }
  int size() const noexcept { return static_cast<int>(values.size()); }
};

/// U(z_k) at the nodes k = 1..Nf of a contour; values[k-1] holds node k.
struct FrequencySamples {
  std::vector<cplx> values;
  ContourSpec contour;

  FrequencySamples(std::vector<cplx> v, ContourSpec c) : values(std::move(v)), contour(c) {
    if (static_cast<int>(values.size()) != contour.n_freq())
      throw InvalidArgument("frequency samples do not match contour node count");
  }
  cplx at(int k) const { return values.at(static_cast<size_t>(k - 1)); }
};

/// Drops the tail where |x_n| < rel_tol * max|x| (keeps at least one sample).
inline std::vector<cplx> truncate_tail(std::vector<cplx> x, double rel_tol = 1e-16) {
  double peak = 0.0;
  for (const auto& v : x) peak = std::max(peak, std::abs(v));
  size_t last = 0;
  for (size_t n = 0; n < x.size(); ++n)
    if (std::abs(x[n]) >= rel_tol * peak && x[n] != 0.0) last = n;
  x.resize(last + 1);
  return x;
}

/// Horner evaluation of sum_n x_n z^n.
inline cplx ztransform_at_node(const TimeSignal& signal, cplx z) {
  cplx acc = 0.0;
  for (auto it = signal.values.rbegin(); it != signal.values.rend(); ++it) acc = acc * z + *it;
  return acc;
}

/// Forward transform at every contour node: folds samples onto Nf bins with the
/// exact weights lambda^(r + kappa Nf), then one length-Nf DFT.
inline FrequencySamples ztransform_all_nodes(std::span<const cplx> samples, const ContourSpec& contour, Dft& dft) {
  const int nf = contour.n_freq();
  if (dft.size() != nf) throw InvalidArgument("DFT length does not match the contour");
  const double lambda = contour.lambda();
  std::vector<cplx> folded(static_cast<size_t>(nf), 0.0);
  for (size_t n = 0; n < samples.size(); ++n) {
    if (samples[n] == 0.0) continue;
    folded[n % static_cast<size_t>(nf)] += samples[n] * std::pow(lambda, static_cast<double>(n));
  }
  const auto y = dft(folded);
  // FFTW index j corresponds to node k = j, with j = 0 standing for k = Nf.
  std::vector<cplx> values(static_cast<size_t>(nf));
  for (int k = 1; k <= nf; ++k) values[static_cast<size_t>(k - 1)] = y[static_cast<size_t>(k % nf)];
  return {std::move(values), contour};
}

inline FrequencySamples ztransform_all_nodes(std::span<const cplx> samples, const ContourSpec& contour) {
  Dft dft(contour.n_freq(), +1);
  return ztransform_all_nodes(samples, contour, dft);
}

inline FrequencySamples ztransform_all_nodes(const TimeSignal& signal, const ContourSpec& contour) {
  return ztransform_all_nodes(std::span<const cplx>(signal.values), contour);
}

/// Amplification factor lambda^-n above which inverse transforms emit a diagnostic.
inline constexpr double kAmplificationWarning = 1e8;

/// Emits the amplification and aliasing notices for an inversion of n_out steps.
inline void check_inversion(const ContourSpec& contour, int n_out) {
  const int nf = contour.n_freq();
  const double lambda = contour.lambda();
  const double amp = std::pow(lambda, -static_cast<double>(n_out - 1));
  if (amp > kAmplificationWarning)
    diag::emit("inverse Z-transform amplifies frequency errors by lambda^-n = " + std::to_string(amp) +
               " (lambda=" + std::to_string(lambda) + ", n=" + std::to_string(n_out - 1) + ")");
  if (n_out > nf)
    diag::emit("inverse Z-transform requested " + std::to_string(n_out) + " steps from " +
               std::to_string(nf) + " nodes; steps n >= Nf are fully aliased");
}

/// Inversion with a caller-owned length-Nf DFT (sign -1) and no notices.
inline std::vector<cplx> inverse_ztransform_values(std::span<const cplx> values, const ContourSpec& contour,
                                                   int n_out, Dft& dft) {
  if (n_out < 1) throw InvalidArgument("inverse transform needs n_out >= 1");
  const int nf = contour.n_freq();
  const double lambda = contour.lambda();
  if (static_cast<int>(values.size()) != nf || dft.size() != nf)
    throw InvalidArgument("inverse transform length does not match the contour");
  std::vector<cplx> shifted(static_cast<size_t>(nf));
  for (int k = 1; k <= nf; ++k) shifted[static_cast<size_t>(k % nf)] = values[static_cast<size_t>(k - 1)];
  const auto y = dft(shifted);
  std::vector<cplx> u(static_cast<size_t>(n_out));
  for (int n = 0; n < n_out; ++n)
    u[static_cast<size_t>(n)] = y[static_cast<size_t>(n % nf)] * std::pow(lambda, -static_cast<double>(n)) /
                                static_cast<double>(nf);
  return u;
}

/// Trapezoidal inversion u_n = (1/Nf) sum_k U(z_k) z_k^-n for n = 0..n_out-1.
inline TimeSignal inverse_ztransform(const FrequencySamples& samples, int n_out, double dt = 1.0) {
  if (n_out < 1) throw InvalidArgument("inverse transform needs n_out >= 1");
  check_inversion(samples.contour, n_out);
  const int nf = samples.contour.n_freq();
  Dft dft(nf, -1);
  return TimeSignal(inverse_ztransform_values(samples.values, samples.contour, n_out, dft), dt);
}

/// Node indices solved in a half-spectrum run: Nf first, then 1..floor(Nf/2).
inline std::vector<int> half_spectrum_indices(int n_freq) {
  std::vector<int> idx{n_freq};
  for (int k = 1; 2 * k <= n_freq && k < n_freq; ++k) idx.push_back(k);
  return idx;
}

/// Tolerance on the imaginary part of values at real nodes (relative to max(1, |U|)).
inline constexpr double kRealNodeTolerance = 1e-10;

/// Completes samples of real time data from nodes {Nf, 1..floor(Nf/2)} using U(conj z) = conj U(z).
inline FrequencySamples expand_half_spectrum(std::span<const cplx> half, const ContourSpec& contour) {
  const int nf = contour.n_freq();
  const auto idx = half_spectrum_indices(nf);
  if (half.size() != idx.size())
    throw InvalidArgument("half spectrum has " + std::to_string(half.size()) + " values, expected " +
                          std::to_string(idx.size()) + " for Nf=" + std::to_string(nf));
  std::vector<cplx> full(static_cast<size_t>(nf));
  std::vector<bool> known(static_cast<size_t>(nf), false);
  for (size_t i = 0; i < idx.size(); ++i) {
    const int k = idx[i];
    cplx v = half[i];
    const bool real_node = (k == nf) || (2 * k == nf);
    if (real_node) {
      if (std::abs(v.imag()) > kRealNodeTolerance * std::max(1.0, std::abs(v)))
        throw InvalidArgument("value at real contour node k=" + std::to_string(k) +
                              " has imaginary part " + std::to_string(v.imag()) + "; time data not real");
      v = {v.real(), 0.0};
    }
    full[static_cast<size_t>(k - 1)] = v;
    known[static_cast<size_t>(k - 1)] = true;
  }
  for (int k = 1; k < nf; ++k) {
    if (known[static_cast<size_t>(k - 1)]) continue;
    full[static_cast<size_t>(k - 1)] = std::conj(full[static_cast<size_t>(nf - k - 1)]);
  }
  return {std::move(full), contour};
}

}  // namespace cqwave
