#pragma once

#include "eqnet/netlist.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace eqnet {

enum class Value3 : std::uint8_t { Zero = 0, One = 1, X = 2 };

Value3 v_and(Value3 a, Value3 b);
Value3 v_or(Value3 a, Value3 b);
Value3 v_xor(Value3 a, Value3 b);
Value3 v_not(Value3 a);
/// S ? B : A; an X select yields A when A == B, else X.
Value3 v_mux(Value3 a, Value3 b, Value3 s);
char to_char(Value3 v);

/// Input bit values for one cycle, in `Simulator::input_bits()` order.
using Vector3 = std::vector<Value3>;

/// Compiled cycle simulator. Registers start at X and latch D at the end of
/// every cycle; combinational logic runs in topological order.
class Simulator {
public:
  /// Throws Error("cyclic-netlist") on combinational cycles.
  explicit Simulator(const Netlist &n);
  ~Simulator();
  Simulator(Simulator &&) noexcept;
  Simulator &operator=(Simulator &&) noexcept;

  /// (port, bit) of every primary input bit, ports in declaration order.
  const std::vector<NetBit> &input_bits() const;
  const std::vector<NetBit> &output_bits() const;
  bool sequential() const;

  void reset();
  /// Evaluates one cycle with the given inputs and returns output values;
  /// registers latch afterwards.
  Vector3 step(const Vector3 &inputs);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Runs `stimulus.size()` cycles from reset and returns per-cycle outputs.
std::vector<Vector3> simulate(const Netlist &n, const std::vector<Vector3> &stimulus);

/// Largest number of registers on any path ending at an output bit.
std::size_t max_path_registers(const Netlist &n);

struct EquivConfig {
  std::size_t max_exhaustive_bits = 12;
  /// Sequential checks enumerate every starting vector up to this many bits.
  std::size_t max_exhaustive_seq_bits = 8;
  std::size_t samples = 256;
  std::uint64_t seed = 1;
  std::size_t cycles = 16;
};

struct Counterexample {
  /// One input vector per cycle up to and including `cycle`.
  std::vector<Vector3> stimulus;
  std::size_t cycle = 0;
  NetBit output;
  Value3 value_a = Value3::X;
  Value3 value_b = Value3::X;
};

struct Verdict {
  bool equivalent = true;
  bool exhaustive = true;
  std::size_t vectors = 0; ///< rows (combinational) or traces (sequential)
  std::uint64_t seed = 0;
  bool sequential = false;
  std::size_t warmup = 0;
  std::optional<Counterexample> counterexample;

  std::string coverage() const;
};

/// Compares two netlists with identical port signatures. Combinational
/// designs are compared on truth tables; designs with registers cycle-wise
/// after a warm-up of max path register count, ignoring X values.
/// Throws Error("port-mismatch").
Verdict check_equiv(const Netlist &a, const Netlist &b, const EquivConfig &cfg = {});

std::string verdict_json(const Verdict &v, const std::vector<NetBit> &inputs);

} // namespace eqnet
