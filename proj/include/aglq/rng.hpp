#pragma once

#include <cstdint>
#include <random>

namespace aglq {

// Independent generator for (seed, replication, stream). Replication workers
// derive their streams from the counter triple, so results do not depend on
// scheduling order.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t replication,
                                   std::uint64_t stream) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(replication),
      static_cast<std::uint32_t>(replication >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace aglq
