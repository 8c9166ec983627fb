#pragma once

#include <string>

#include "cqwave/contour.hpp"
#include "cqwave/errors.hpp"

namespace cqwave {

enum class FormulationKind { first_kind, second_kind, combined_const, combined_omega };

struct Formulation {
  FormulationKind kind = FormulationKind::first_kind;
  cplx eta = 0.0;

  static Formulation first_kind() { return {FormulationKind::first_kind, 0.0}; }
  static Formulation second_kind() { return {FormulationKind::second_kind, 0.0}; }
  static Formulation combined(cplx eta) { return {FormulationKind::combined_const, eta}; }
  static Formulation combined_omega() { return {FormulationKind::combined_omega, 0.0}; }

  /// Coupling parameter at a given node frequency.
  cplx eta_at(cplx omega) const {
    switch (kind) {
      case FormulationKind::first_kind: return 0.0;
      case FormulationKind::second_kind: return 0.0;
      case FormulationKind::combined_const: return eta;
      case FormulationKind::combined_omega: return omega;
    }
    return 0.0;
  }
  bool uses_single_layer() const { return kind != FormulationKind::second_kind; }
  bool uses_double_layer() const { return kind != FormulationKind::first_kind; }

  std::string name() const {
    switch (kind) {
      case FormulationKind::first_kind: return "first-kind";
      case FormulationKind::second_kind: return "second-kind";
      case FormulationKind::combined_const: return "combined-const";
      case FormulationKind::combined_omega: return "combined-omega";
    }
    return "?";
  }
  static FormulationKind kind_from_name(const std::string& s) {
    if (s == "first-kind") return FormulationKind::first_kind;
    if (s == "second-kind") return FormulationKind::second_kind;
    if (s == "combined-const") return FormulationKind::combined_const;
    if (s == "combined-omega") return FormulationKind::combined_omega;
    throw InvalidArgument("unknown formulation '" + s + "'");
  }
  bool operator==(const Formulation&) const = default;
};

}  // namespace cqwave
