#pragma once

#include <cstdint>
#include <random>

namespace margreg::detail {

// Independent stream per (seed, stream index, purpose tag).
inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream,
                                     std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), tag};
  return std::mt19937_64(seq);
}

}  // namespace margreg::detail
