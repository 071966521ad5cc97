#pragma once

#include <cstdint>
#include <random>

namespace sirl {

/// Independent random streams derived from one master seed.
///
/// Every source of randomness in a run is keyed by (stream, a, b), where the
/// indices identify e.g. the generation and the worker or individual. Workers
/// therefore get reproducible streams regardless of scheduling order.
enum class Stream : std::uint64_t {
  evolution = 1,      // population init + variation operators
  q_init = 2,         // leaf Q initialization, per (generation, individual)
  collab_env = 3,     // shared-environment episode seeds, per (generation, worker)
  collab_actions = 4, // proposal/vote sampling, per (generation, worker)
  ind_env = 5,        // private-environment episode seeds, per (generation, individual)
  ind_actions = 6,    // individual-phase action sampling, per (generation, individual)
  eval_episode = 7,   // greedy evaluation episode seeds
  sweep_row = 8,      // per-row seeds of a coefficient sweep
};

// splitmix64 finalizer; counter-based so derivations never overlap.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                    std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t z = mix64(master ^ mix64(static_cast<std::uint64_t>(stream)));
  z = mix64(z ^ mix64(a));
  return mix64(z ^ mix64(b));
}

inline std::mt19937_64 make_rng(std::uint64_t master, Stream stream,
                                std::uint64_t a = 0, std::uint64_t b = 0) {
  return std::mt19937_64(derive_seed(master, stream, a, b));
}

}  // namespace sirl
