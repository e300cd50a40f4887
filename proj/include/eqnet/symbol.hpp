#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace eqnet {

/// Interned operator name. Equality and hashing are O(1); ordering follows
/// the underlying string so that sorted containers are reproducible no
/// matter in which order names were first interned.
class Symbol {
public:
  Symbol() = default;
  explicit Symbol(std::string_view name);

  const std::string &str() const;
  std::uint32_t id() const noexcept { return id_; }

  friend bool operator==(Symbol a, Symbol b) noexcept { return a.id_ == b.id_; }
  friend std::strong_ordering operator<=>(Symbol a, Symbol b) {
    if (a.id_ == b.id_)
      return std::strong_ordering::equal;
    return a.str().compare(b.str()) < 0 ? std::strong_ordering::less
                                        : std::strong_ordering::greater;
  }

private:
  std::uint32_t id_ = 0; // 0 is the empty string
};

} // namespace eqnet

template <> struct std::hash<eqnet::Symbol> {
  std::size_t operator()(eqnet::Symbol s) const noexcept { return s.id(); }
};
