#pragma once

#include <cstdint>
#include <random>

namespace laserplan {

enum class Stream : std::uint32_t { Planner = 1, Plant = 2, Scan = 3, Scenario = 4 };

/// Independent generator for one named consumer of a run seed.
inline std::mt19937_64 substream(std::uint64_t seed, Stream tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

}  // namespace laserplan
