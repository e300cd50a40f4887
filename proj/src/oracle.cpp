#include "eqnet/oracle.hpp"

#include "eqnet/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <random>
#include <set>

namespace eqnet {

Value3 v_and(Value3 a, Value3 b) {
  if (a == Value3::Zero || b == Value3::Zero)
    return Value3::Zero;
  if (a == Value3::One && b == Value3::One)
    return Value3::One;
  return Value3::X;
}

Value3 v_or(Value3 a, Value3 b) {
  if (a == Value3::One || b == Value3::One)
    return Value3::One;
  if (a == Value3::Zero && b == Value3::Zero)
    return Value3::Zero;
  return Value3::X;
}

Value3 v_xor(Value3 a, Value3 b) {
  if (a == Value3::X || b == Value3::X)
    return Value3::X;
  return a == b ? Value3::Zero : Value3::One;
}

Value3 v_not(Value3 a) {
  if (a == Value3::X)
    return Value3::X;
  return a == Value3::One ? Value3::Zero : Value3::One;
}

Value3 v_mux(Value3 a, Value3 b, Value3 s) {
  if (s == Value3::Zero)
    return a;
  if (s == Value3::One)
    return b;
  return a == b ? a : Value3::X;
}

char to_char(Value3 v) { return v == Value3::Zero ? '0' : v == Value3::One ? '1' : 'x'; }

// ------------------------------------------------------------ Simulator --

namespace {

enum class Op : std::uint8_t { And, Or, Xor, Not, Mux, Const0, Const1, Buf, HalfAdder, FullAdder, Mux2, Sub };

struct Instr {
  Op op;
  std::vector<std::uint32_t> in;
  std::vector<std::uint32_t> out;
  std::size_t sub = 0;
};

} // namespace

struct Simulator::Impl {
  std::vector<NetBit> inputs;
  std::vector<NetBit> outputs;
  std::vector<std::uint32_t> input_slots;
  std::vector<std::uint32_t> output_slots;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> regs; // (D slot, Q slot)
  std::vector<Instr> program;
  std::vector<Simulator> subs;
  std::vector<Value3> values;
  std::vector<Value3> state;

  Impl(const Netlist &n, const std::vector<Netlist> &inherited_defs) {
    std::map<NetBit, std::uint32_t> slot;
    for (const auto &[net, w] : n.nets)
      for (std::size_t b = 0; b < w; ++b)
        slot.emplace(NetBit{net, b}, static_cast<std::uint32_t>(slot.size()));
    auto at = [&](const NetBit &nb) {
      auto it = slot.find(nb);
      if (it == slot.end())
        throw Error("undeclared-net", to_string(nb) + " is not declared");
      return it->second;
    };
    for (const auto &p : n.ports)
      for (std::size_t b = 0; b < p.width; ++b) {
        NetBit nb{p.name, b};
        if (p.direction == Direction::Input) {
          inputs.push_back(nb);
          input_slots.push_back(at(nb));
        } else {
          outputs.push_back(nb);
          output_slots.push_back(at(nb));
        }
      }

    std::vector<Netlist> defs = inherited_defs;
    for (const auto &d : n.definitions) {
      auto it = std::find_if(defs.begin(), defs.end(), [&](const Netlist &x) { return x.name == d.name; });
      if (it == defs.end())
        defs.push_back(d);
      else
        *it = d;
    }
    std::map<std::string, std::size_t> sub_index;

    std::vector<Instr> unordered;
    for (const auto &c : n.cells) {
      if (c.kind == "REG") {
        regs.emplace_back(at(c.pins.at("D")), at(c.pins.at("Q")));
        continue;
      }
      Instr ins{};
      std::optional<KindSig> sig;
      if (const KindSig *k = builtin_kind(c.kind)) {
        sig = *k;
        static const std::map<std::string, Op> ops = {
            {"AND", Op::And},       {"OR", Op::Or},         {"XOR", Op::Xor},
            {"NOT", Op::Not},       {"MUX", Op::Mux},       {"CONST0", Op::Const0},
            {"CONST1", Op::Const1}, {"HalfAdder", Op::HalfAdder}, {"FullAdder", Op::FullAdder},
            {"Mux2", Op::Mux2}};
        ins.op = ops.at(c.kind);
      } else {
        auto it = std::find_if(defs.begin(), defs.end(), [&](const Netlist &x) { return x.name == c.kind; });
        if (it == defs.end())
          throw Error("unknown-cell-kind", "no semantics for cell kind '" + c.kind + "'");
        sig = definition_signature(*it);
        ins.op = Op::Sub;
        if (auto s = sub_index.find(c.kind); s != sub_index.end()) {
          ins.sub = s->second;
        } else {
          // Nested definitions see the enclosing ones too.
          Netlist def = *it;
          for (const auto &d : defs)
            if (d.name != def.name && !def.find_definition(d.name))
              def.definitions.push_back(d);
          subs.emplace_back(Simulator(def));
          ins.sub = subs.size() - 1;
          sub_index.emplace(c.kind, ins.sub);
        }
      }
      for (const auto &in : sig->inputs)
        ins.in.push_back(at(c.pins.at(in)));
      for (const auto &out : sig->outputs)
        ins.out.push_back(at(c.pins.at(out)));
      unordered.push_back(std::move(ins));
    }
    for (const auto &a : n.assigns)
      unordered.push_back(Instr{Op::Buf, {at(a.source)}, {at(a.sink)}, 0});

    // Kahn ordering: an instruction is ready once all of its input slots are
    // produced. Inputs, register outputs, and undriven slots are ready.
    std::vector<int> producer(slot.size(), -1);
    for (std::size_t i = 0; i < unordered.size(); ++i)
      for (auto o : unordered[i].out)
        producer[o] = static_cast<int>(i);
    std::vector<std::size_t> pending(unordered.size(), 0);
    std::vector<std::vector<std::size_t>> readers(slot.size());
    for (std::size_t i = 0; i < unordered.size(); ++i)
      for (auto in : unordered[i].in)
        if (producer[in] >= 0) {
          ++pending[i];
          readers[in].push_back(i);
        }
    std::vector<std::size_t> ready;
    for (std::size_t i = unordered.size(); i-- > 0;)
      if (pending[i] == 0)
        ready.push_back(i);
    std::vector<bool> placed(unordered.size(), false);
    while (!ready.empty()) {
      std::size_t i = ready.back();
      ready.pop_back();
      placed[i] = true;
      program.push_back(unordered[i]);
      for (auto o : unordered[i].out)
        for (auto r : readers[o])
          if (--pending[r] == 0)
            ready.push_back(r);
    }
    if (program.size() != unordered.size()) {
      for (std::size_t i = 0; i < unordered.size(); ++i)
        if (!placed[i])
          for (const auto &[nb, s] : slot)
            if (!unordered[i].out.empty() && s == unordered[i].out[0])
              throw Error("cyclic-netlist", "combinational cycle through " + to_string(nb));
      throw Error("cyclic-netlist", "combinational cycle");
    }
    values.assign(slot.size(), Value3::X);
    state.assign(regs.size(), Value3::X);
  }

  Vector3 step(const Vector3 &in) {
    if (in.size() != input_slots.size())
      throw Error("stimulus", "expected " + std::to_string(input_slots.size()) + " input bits, got " +
                                  std::to_string(in.size()));
    for (std::size_t i = 0; i < in.size(); ++i)
      values[input_slots[i]] = in[i];
    for (std::size_t r = 0; r < regs.size(); ++r)
      values[regs[r].second] = state[r];
    for (auto &ins : program) {
      auto v = [&](std::size_t k) { return values[ins.in[k]]; };
      switch (ins.op) {
      case Op::And: values[ins.out[0]] = v_and(v(0), v(1)); break;
      case Op::Or: values[ins.out[0]] = v_or(v(0), v(1)); break;
      case Op::Xor: values[ins.out[0]] = v_xor(v(0), v(1)); break;
      case Op::Not: values[ins.out[0]] = v_not(v(0)); break;
      case Op::Mux: values[ins.out[0]] = v_mux(v(0), v(1), v(2)); break;
      case Op::Const0: values[ins.out[0]] = Value3::Zero; break;
      case Op::Const1: values[ins.out[0]] = Value3::One; break;
      case Op::Buf: values[ins.out[0]] = v(0); break;
      case Op::HalfAdder:
        values[ins.out[0]] = v_xor(v(0), v(1));
        values[ins.out[1]] = v_and(v(0), v(1));
        break;
      case Op::FullAdder: {
        Value3 ab = v_xor(v(0), v(1));
        values[ins.out[0]] = v_xor(ab, v(2));
        values[ins.out[1]] = v_or(v_and(v(0), v(1)), v_and(v(2), ab));
        break;
      }
      case Op::Mux2:
        values[ins.out[0]] = v_or(v_and(v(0), v_not(v(2))), v_and(v(1), v(2)));
        break;
      case Op::Sub: {
        Vector3 sub_in;
        sub_in.reserve(ins.in.size());
        for (auto s : ins.in)
          sub_in.push_back(values[s]);
        Vector3 sub_out = subs[ins.sub].step(sub_in);
        for (std::size_t k = 0; k < ins.out.size(); ++k)
          values[ins.out[k]] = sub_out[k];
        break;
      }
      }
    }
    Vector3 out;
    out.reserve(output_slots.size());
    for (auto s : output_slots)
      out.push_back(values[s]);
    for (std::size_t r = 0; r < regs.size(); ++r)
      state[r] = values[regs[r].first];
    return out;
  }
};

Simulator::Simulator(const Netlist &n) : impl_(std::make_unique<Impl>(n, std::vector<Netlist>{})) {}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator &&) noexcept = default;
Simulator &Simulator::operator=(Simulator &&) noexcept = default;

const std::vector<NetBit> &Simulator::input_bits() const { return impl_->inputs; }
const std::vector<NetBit> &Simulator::output_bits() const { return impl_->outputs; }
bool Simulator::sequential() const { return !impl_->regs.empty(); }
void Simulator::reset() { std::fill(impl_->state.begin(), impl_->state.end(), Value3::X); }
Vector3 Simulator::step(const Vector3 &inputs) { return impl_->step(inputs); }

std::vector<Vector3> simulate(const Netlist &n, const std::vector<Vector3> &stimulus) {
  Simulator sim(n);
  std::vector<Vector3> out;
  out.reserve(stimulus.size());
  for (const auto &v : stimulus)
    out.push_back(sim.step(v));
  return out;
}

std::size_t max_path_registers(const Netlist &n) {
  std::map<NetBit, std::vector<std::pair<NetBit, std::size_t>>> preds; // bit ← (bit, +regs)
  for (const auto &c : n.cells) {
    auto sig = n.signature(c.kind);
    if (!sig)
      throw Error("unknown-cell-kind", "unknown kind '" + c.kind + "'");
    std::size_t w = c.kind == "REG" ? 1 : 0;
    for (const auto &o : sig->outputs)
      for (const auto &i : sig->inputs)
        preds[c.pins.at(o)].emplace_back(c.pins.at(i), w);
  }
  for (const auto &a : n.assigns)
    preds[a.sink].emplace_back(a.source, 0);
  std::map<NetBit, std::size_t> memo;
  std::set<NetBit> active;
  std::function<std::size_t(const NetBit &)> depth = [&](const NetBit &nb) -> std::size_t {
    if (auto it = memo.find(nb); it != memo.end())
      return it->second;
    if (!active.insert(nb).second)
      throw Error("cyclic-netlist", "cycle through " + to_string(nb));
    std::size_t best = 0;
    if (auto it = preds.find(nb); it != preds.end())
      for (const auto &[p, w] : it->second)
        best = std::max(best, depth(p) + w);
    active.erase(nb);
    memo.emplace(nb, best);
    return best;
  };
  std::size_t best = 0;
  for (const auto &p : n.ports)
    if (p.direction == Direction::Output)
      for (std::size_t b = 0; b < p.width; ++b)
        best = std::max(best, depth({p.name, b}));
  return best;
}

// ---------------------------------------------------------- equivalence --

std::string Verdict::coverage() const {
  if (exhaustive)
    return sequential ? "exhaustive-start(" + std::to_string(vectors) + " traces)"
                      : "exhaustive(" + std::to_string(vectors) + " rows)";
  return "sampled(" + std::to_string(vectors) + ", seed " + std::to_string(seed) + ")";
}

namespace {

void check_ports(const Netlist &a, const Netlist &b) {
  auto sig = [](const Netlist &n) {
    std::map<std::string, std::pair<Direction, std::size_t>> m;
    for (const auto &p : n.ports)
      m[p.name] = {p.direction, p.width};
    return m;
  };
  if (sig(a) != sig(b))
    throw Error("port-mismatch", "netlists '" + a.name + "' and '" + b.name +
                                     "' have different port signatures");
}

std::vector<std::size_t> permutation(const std::vector<NetBit> &from, const std::vector<NetBit> &to) {
  // perm[i] = position in `to` of from[i]
  std::map<NetBit, std::size_t> pos;
  for (std::size_t i = 0; i < to.size(); ++i)
    pos[to[i]] = i;
  std::vector<std::size_t> perm;
  for (const auto &nb : from)
    perm.push_back(pos.at(nb));
  return perm;
}

Vector3 permute(const Vector3 &v, const std::vector<std::size_t> &perm) {
  Vector3 out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[perm[i]] = v[i];
  return out;
}

Vector3 vector_from_bits(std::uint64_t bits, std::size_t n) {
  Vector3 v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = (bits >> i) & 1 ? Value3::One : Value3::Zero;
  return v;
}

Vector3 random_vector(std::mt19937_64 &rng, std::size_t n) {
  Vector3 v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = rng() & 1 ? Value3::One : Value3::Zero;
  return v;
}

} // namespace

Verdict check_equiv(const Netlist &a, const Netlist &b, const EquivConfig &cfg) {
  check_ports(a, b);
  Simulator sa(a), sb(b);
  auto in_perm = permutation(sa.input_bits(), sb.input_bits());
  auto out_perm = permutation(sa.output_bits(), sb.output_bits());
  const std::size_t nin = sa.input_bits().size();

  Verdict v;
  v.seed = cfg.seed;
  v.sequential = sa.sequential() || sb.sequential();
  std::mt19937_64 rng(cfg.seed);

  auto compare = [&](const Vector3 &oa, const Vector3 &ob) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < oa.size(); ++i) {
      Value3 x = oa[i], y = ob[out_perm[i]];
      if (x != Value3::X && y != Value3::X && x != y)
        return i;
    }
    return std::nullopt;
  };

  if (!v.sequential) {
    v.exhaustive = nin <= cfg.max_exhaustive_bits;
    std::uint64_t rows = v.exhaustive ? (std::uint64_t{1} << nin) : cfg.samples;
    for (std::uint64_t r = 0; r < rows; ++r) {
      Vector3 in = v.exhaustive ? vector_from_bits(r, nin) : random_vector(rng, nin);
      Vector3 oa = sa.step(in);
      Vector3 ob = sb.step(permute(in, in_perm));
      ++v.vectors;
      if (auto bad = compare(oa, ob)) {
        v.equivalent = false;
        v.counterexample = Counterexample{{in}, 0, sa.output_bits()[*bad], oa[*bad], ob[out_perm[*bad]]};
        return v;
      }
    }
    return v;
  }

  v.warmup = std::max(max_path_registers(a), max_path_registers(b));
  const std::size_t length = v.warmup + cfg.cycles;
  v.exhaustive = nin <= cfg.max_exhaustive_seq_bits;
  std::uint64_t traces = v.exhaustive ? (std::uint64_t{1} << nin) : cfg.samples;
  for (std::uint64_t t = 0; t < traces; ++t) {
    sa.reset();
    sb.reset();
    std::vector<Vector3> stim;
    for (std::size_t cyc = 0; cyc < length; ++cyc) {
      stim.push_back(cyc == 0 && v.exhaustive ? vector_from_bits(t, nin) : random_vector(rng, nin));
      Vector3 oa = sa.step(stim.back());
      Vector3 ob = sb.step(permute(stim.back(), in_perm));
      if (cyc < v.warmup)
        continue;
      if (auto bad = compare(oa, ob)) {
        ++v.vectors;
        v.equivalent = false;
        v.counterexample = Counterexample{stim, cyc, sa.output_bits()[*bad], oa[*bad], ob[out_perm[*bad]]};
        return v;
      }
    }
    ++v.vectors;
  }
  return v;
}

std::string verdict_json(const Verdict &v, const std::vector<NetBit> &inputs) {
  nlohmann::ordered_json j;
  j["equivalent"] = v.equivalent;
  j["coverage"] = v.coverage();
  j["sequential"] = v.sequential;
  j["warmup"] = v.warmup;
  if (v.counterexample) {
    const auto &cx = *v.counterexample;
    nlohmann::ordered_json cycles = nlohmann::ordered_json::array();
    for (const auto &vec : cx.stimulus) {
      nlohmann::ordered_json row = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < vec.size() && i < inputs.size(); ++i)
        row[to_string(inputs[i])] = std::string(1, to_char(vec[i]));
      cycles.push_back(row);
    }
    j["counterexample"] = {{"cycle", cx.cycle},
                           {"output", to_string(cx.output)},
                           {"value_a", std::string(1, to_char(cx.value_a))},
                           {"value_b", std::string(1, to_char(cx.value_b))},
                           {"stimulus", cycles}};
  }
  return j.dump(2) + "\n";
}

} // namespace eqnet
