#pragma once

#include <cstdint>
#include <random>

namespace zxm {

/// splitmix64 step; the de-facto standard seed expander.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic per-stream RNG. Stream k of a run with master seed s is
/// seeded from the splitmix64 chain of (s, k), so independent work units
/// (frames, trials, sweep points) can be generated in any order or on any
/// worker and still reproduce bit-identically.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

}  // namespace zxm
