#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <random>

namespace eemc {

inline constexpr int kMaxDimension = 8;

/// A point of the state space. Continuous targets use one component per
/// coordinate; finite targets store the state index in component 0.
using State = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDimension, 1>;

inline State finite_state(std::size_t index) {
  State s(1);
  s[0] = static_cast<double>(index);
  return s;
}

inline std::size_t state_index(const State& s) { return static_cast<std::size_t>(s[0]); }

using Rng = std::mt19937_64;

/// Derives an independent stream from (seed, index). Streams for distinct
/// indices never depend on how many other indices are in use.
inline Rng derive_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

/// Child seed for replication `index` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  Rng r = derive_stream(master ^ 0xa5a5a5a5a5a5a5a5ull, index);
  return r();
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

}  // namespace eemc
