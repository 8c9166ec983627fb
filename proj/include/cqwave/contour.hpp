#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "cqwave/errors.hpp"

namespace cqwave {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

/// Circle |z| = lambda sampled at n_freq equispaced nodes.
class ContourSpec {
 public:
  ContourSpec(double lambda, int n_freq) : lambda_(lambda), n_freq_(n_freq) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw InvalidArgument("contour radius must be positive and finite");
    if (n_freq < 1) throw InvalidArgument("contour node count must be >= 1");
  }

  double lambda() const noexcept { return lambda_; }
  int n_freq() const noexcept { return n_freq_; }

  /// z_k = lambda * exp(2 pi i k / Nf), k = 1..Nf. Nodes k and Nf-k are exact conjugates.
  cplx node(int k) const {
    if (k < 1 || k > n_freq_) throw InvalidArgument("contour node index out of range");
    const int kk = k % n_freq_;
    if (2 * kk > n_freq_) return std::conj(node(n_freq_ - kk));
    if (kk == 0) return {lambda_, 0.0};
    if (2 * kk == n_freq_) return {-lambda_, 0.0};
    const double theta = 2.0 * std::numbers::pi * kk / n_freq_;
    return lambda_ * cplx(std::cos(theta), std::sin(theta));
  }

  bool operator==(const ContourSpec&) const = default;

 private:
  double lambda_;
  int n_freq_;
};

inline std::vector<cplx> contour_nodes(const ContourSpec& contour) {
  std::vector<cplx> z(contour.n_freq());
  for (int k = 1; k <= contour.n_freq(); ++k) z[k - 1] = contour.node(k);
  return z;
}

/// Uniform time grid t_n = n dt, n = 0..n_steps, with wave speed c.
class TimeGrid {
 public:
  TimeGrid(double c, double t_final, int n_steps) : c_(c), t_final_(t_final), n_steps_(n_steps) {
    if (!(c > 0.0)) throw InvalidArgument("wave speed must be positive");
    if (n_steps < 1) throw InvalidArgument("step count must be >= 1");
    if (!(t_final > 0.0)) throw InvalidArgument("final time must be positive");
    dt_ = t_final / n_steps;
  }

  static TimeGrid from_step(double c, double dt, int n_steps) {
    return TimeGrid(c, dt * n_steps, n_steps);
  }

  double c() const noexcept { return c_; }
  double dt() const noexcept { return dt_; }
  int n_steps() const noexcept { return n_steps_; }
  double t_final() const noexcept { return t_final_; }
  double c_dt() const noexcept { return c_ * dt_; }
  double time(int n) const noexcept { return n * dt_; }

  bool operator==(const TimeGrid&) const = default;

 private:
  double c_;
  double t_final_;
  int n_steps_;
  double dt_ = 0.0;
};

enum class MultistepKind { backward_euler, bdf2 };

/// Linear multistep rule through its generating polynomial gamma(z) = sum gamma_n z^n.
class MultistepRule {
 public:
  static MultistepRule backward_euler() { return {MultistepKind::backward_euler, {1.0, -1.0}}; }
  static MultistepRule bdf2() { return {MultistepKind::bdf2, {1.5, -2.0, 0.5}}; }

  static MultistepRule from_name(std::string_view name) {
    if (name == "backward-euler") return backward_euler();
    if (name == "bdf2") return bdf2();
    throw InvalidArgument("unknown multistep rule '" + std::string(name) + "'");
  }

  MultistepKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept {
    return kind_ == MultistepKind::backward_euler ? "backward-euler" : "bdf2";
  }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }

 private:
  MultistepRule(MultistepKind kind, std::vector<double> coeffs)
      : kind_(kind), coeffs_(std::move(coeffs)) {}

  MultistepKind kind_;
  std::vector<double> coeffs_;
};

inline cplx multistep_symbol(const MultistepRule& rule, cplx z) {
  const auto& g = rule.coeffs();
  cplx acc = 0.0;
  for (auto it = g.rbegin(); it != g.rend(); ++it) acc = acc * z + *it;
  return acc;
}

/// Modified-Helmholtz parameter omega and Helmholtz wavenumber k = i omega of one node.
struct NodeFrequency {
  cplx omega;
  cplx k;
};

inline NodeFrequency frequency_of_node(cplx gamma_value, const TimeGrid& grid) {
  const cplx omega = gamma_value / grid.c_dt();
  return {omega, I * omega};
}

}  // namespace cqwave
