#pragma once

#include <optional>
#include <string>

#include "cqwave/contour.hpp"
#include "cqwave/errors.hpp"
#include "cqwave/radau.hpp"

namespace cqwave {

/// Either a linear multistep rule or a stiffly accurate Runge-Kutta tableau.
struct TimeRule {
  std::optional<MultistepRule> multistep;
  std::optional<RKTableau> rk;

  static TimeRule from_name(const std::string& name) {
    if (name == "radau2a") return {std::nullopt, RKTableau::radau2a()};
    return {MultistepRule::from_name(name), std::nullopt};
  }
  bool is_rk() const noexcept { return rk.has_value(); }
  std::string name() const { return rk ? rk->name : std::string(multistep->name()); }
};

}  // namespace cqwave
