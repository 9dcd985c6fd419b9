#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace cmm {

using Rng = std::mt19937_64;

/// Independent deterministic stream for a (seed, index...) tuple.
inline Rng make_stream(std::uint64_t seed,
                       std::initializer_list<std::uint64_t> indices = {}) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed),
                                   static_cast<std::uint32_t>(seed >> 32)};
  for (auto i : indices) {
    words.push_back(static_cast<std::uint32_t>(i));
    words.push_back(static_cast<std::uint32_t>(i >> 32));
  }
  std::seed_seq full(words.begin(), words.end());
  return Rng(full);
}

}  // namespace cmm
