#pragma once

#include "eqnet/netlist.hpp"

#include <string>
#include <string_view>

namespace eqnet {

enum class NetlistFormat { Json, Sexpr };

/// Picks a format from a file extension (`.json` → Json, otherwise Sexpr).
NetlistFormat format_for_path(std::string_view path);

/// Parses and validates. Errors: "syntax" (with position), plus every
/// validator error.
Netlist parse_netlist(std::string_view text, NetlistFormat format);
std::string write_netlist(const Netlist &n, NetlistFormat format);

Netlist read_netlist_file(const std::string &path);
void write_netlist_file(const Netlist &n, const std::string &path);

std::string read_file(const std::string &path);
void write_file(const std::string &path, std::string_view contents);

} // namespace eqnet
