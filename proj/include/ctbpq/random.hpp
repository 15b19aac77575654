#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ctbpq {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

// Independent generator for replication `index` under `seed`. Depends only on
// the pair, so replications can run in any order.
inline Rng substream(std::uint64_t seed, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

// Uniform on (0, 1].
inline double uniform_open_closed(Rng& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) { return -std::log(uniform_open_closed(rng)) / rate; }

}  // namespace ctbpq
