#include "eqnet/symbol.hpp"

#include <array>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace eqnet {
namespace {

constexpr std::size_t kChunkBits = 12;
constexpr std::size_t kChunkSize = std::size_t{1} << kChunkBits;
constexpr std::size_t kMaxChunks = 1 << 14;

// Names live in fixed chunks that are never moved, so `str()` can read
// without taking the lock: a Symbol id is only observable after the write
// that stored its name.
struct SymbolTable {
  std::shared_mutex mutex;
  std::array<std::unique_ptr<std::string[]>, kMaxChunks> chunks;
  std::size_t count = 0;
  std::unordered_map<std::string_view, std::uint32_t> index;

  SymbolTable() {
    chunks[0] = std::make_unique<std::string[]>(kChunkSize);
    count = 1;
    index.emplace(std::string_view{}, 0);
  }
};

SymbolTable &table() {
  static SymbolTable t;
  return t;
}

} // namespace

Symbol::Symbol(std::string_view name) {
  auto &t = table();
  {
    std::shared_lock lock(t.mutex);
    if (auto it = t.index.find(name); it != t.index.end()) {
      id_ = it->second;
      return;
    }
  }
  std::unique_lock lock(t.mutex);
  if (auto it = t.index.find(name); it != t.index.end()) {
    id_ = it->second;
    return;
  }
  std::size_t id = t.count++;
  auto &chunk = t.chunks.at(id >> kChunkBits);
  if (!chunk)
    chunk = std::make_unique<std::string[]>(kChunkSize);
  std::string &slot = chunk[id & (kChunkSize - 1)];
  slot = std::string(name);
  id_ = static_cast<std::uint32_t>(id);
  t.index.emplace(slot, id_);
}

const std::string &Symbol::str() const {
  return table().chunks[id_ >> kChunkBits][id_ & (kChunkSize - 1)];
}

} // namespace eqnet
