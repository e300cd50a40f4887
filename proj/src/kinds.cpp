#include "eqnet/kinds.hpp"

#include <algorithm>
#include <charconv>

namespace eqnet {

std::optional<std::size_t> KindSig::input_index(std::string_view pin) const {
  auto it = std::find(inputs.begin(), inputs.end(), pin);
  if (it == inputs.end())
    return std::nullopt;
  return static_cast<std::size_t>(it - inputs.begin());
}

std::optional<std::size_t> KindSig::output_index(std::string_view pin) const {
  auto it = std::find(outputs.begin(), outputs.end(), pin);
  if (it == outputs.end())
    return std::nullopt;
  return static_cast<std::size_t>(it - outputs.begin());
}

namespace {

const std::vector<KindSig> &builtins() {
  static const std::vector<KindSig> table = {
      {"AND", KindClass::Gate, {"A", "B"}, {"Y"}},
      {"OR", KindClass::Gate, {"A", "B"}, {"Y"}},
      {"XOR", KindClass::Gate, {"A", "B"}, {"Y"}},
      {"NOT", KindClass::Gate, {"A"}, {"Y"}},
      {"MUX", KindClass::Gate, {"A", "B", "S"}, {"Y"}},
      {"REG", KindClass::Register, {"D"}, {"Q"}},
      {"CONST0", KindClass::Constant, {}, {"Y"}},
      {"CONST1", KindClass::Constant, {}, {"Y"}},
      {"HalfAdder", KindClass::Component, {"A", "B"}, {"S", "C"}},
      {"FullAdder", KindClass::Component, {"A", "B", "Cin"}, {"S", "Cout"}},
      {"Mux2", KindClass::Component, {"A", "B", "S"}, {"Y"}},
  };
  return table;
}

} // namespace

const KindSig *builtin_kind(std::string_view name) {
  for (const auto &k : builtins())
    if (k.name == name)
      return &k;
  return nullptr;
}

const std::vector<std::string> &gate_kinds() {
  static const std::vector<std::string> kinds = {"AND", "OR", "XOR", "NOT", "MUX"};
  return kinds;
}

bool is_builtin_component(std::string_view name) {
  const KindSig *k = builtin_kind(name);
  return k && k->cls == KindClass::Component;
}

bool is_learned_name(std::string_view name) {
  return name.size() > 4 && name.substr(0, 4) == "def_";
}

std::optional<std::size_t> proj_index(std::string_view op) {
  if (op.size() <= 4 || op.substr(0, 4) != "proj")
    return std::nullopt;
  std::size_t k = 0;
  auto digits = op.substr(4);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
  if (ec != std::errc{} || ptr != digits.data() + digits.size())
    return std::nullopt;
  return k;
}

std::string proj_name(std::size_t k) { return "proj" + std::to_string(k); }

} // namespace eqnet
