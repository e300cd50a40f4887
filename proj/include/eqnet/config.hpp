#pragma once

#include "eqnet/netlist_io.hpp"
#include "eqnet/retime.hpp"
#include "eqnet/rewrite.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eqnet {

/// Settings shared by every subcommand. Unset fields keep these defaults;
/// the config file is applied first and command-line flags override it.
struct Config {
  std::vector<std::string> rules;   ///< rule files; empty = built-in set of the pass
  std::vector<std::string> library; ///< component libraries; empty = standard library
  RunLimits limits{30, 20000, 60.0};
  double ilp_seconds = 30.0;
  std::string cost_model; ///< path; empty = the pass's default model
  ExtractorKind extractor = ExtractorKind::Ilp;
  std::uint64_t seed = 1;
  std::optional<NetlistFormat> format; ///< output format; unset = by extension
  std::size_t jobs = 1;
};

/// `key = value` lines, `#` comments. Keys: rules, library (comma
/// separated), iter-limit, node-limit, time-limit, ilp-time-limit,
/// cost-model, extractor, seed, format, jobs. Errors: "config".
Config parse_config(std::string_view text, Config base = {});
std::string write_config(const Config &c);

NetlistFormat parse_format(std::string_view s);

} // namespace eqnet
