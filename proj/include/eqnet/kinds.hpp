#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eqnet {

enum class KindClass {
  Gate,      ///< AND OR XOR NOT MUX
  Constant,  ///< CONST0 CONST1
  Register,  ///< REG
  Component, ///< multi-output library component, appears as (proj<k> (C ...))
  Learned,   ///< def_<k> abstraction, appears as (apply def_<k> ...)
};

/// Pin-level signature of a cell kind. Inputs are listed in the order in
/// which they become term children.
struct KindSig {
  std::string name;
  KindClass cls = KindClass::Gate;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  bool combinational() const { return cls != KindClass::Register; }
  std::optional<std::size_t> input_index(std::string_view pin) const;
  std::optional<std::size_t> output_index(std::string_view pin) const;
};

/// Signatures of the fixed gate library and the standard components
/// (HalfAdder, FullAdder, Mux2). Returns nullopt for anything else.
const KindSig *builtin_kind(std::string_view name);

/// Fixed gate kinds, in canonical order.
const std::vector<std::string> &gate_kinds();

/// Names of built-in components that have native simulation semantics.
bool is_builtin_component(std::string_view name);

/// `def_<k>` names denote learned abstractions.
bool is_learned_name(std::string_view name);

/// Recognises `proj<k>` and returns k.
std::optional<std::size_t> proj_index(std::string_view op);
std::string proj_name(std::size_t k);

} // namespace eqnet
