#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pkf {

using Seed = std::uint64_t;
using Engine = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent child seed from a parent and a path of labels.
// Pure function, so a stream is identified by where it sits in the tree and
// not by how many draws happened before it.
constexpr Seed derive_seed(Seed parent, std::initializer_list<std::uint64_t> path) noexcept {
  Seed s = mix64(parent);
  for (auto label : path) s = mix64(s ^ mix64(label + 0x632be59bd9b4e019ULL));
  return s;
}

// Fixed labels for the sub-streams of one release or one trial.
namespace stream {
inline constexpr std::uint64_t kTheta1 = 0x7431;
inline constexpr std::uint64_t kTheta2 = 0x7432;
inline constexpr std::uint64_t kCrossNoise = 0x6531;
inline constexpr std::uint64_t kEstimateNoise = 0x6532;
inline constexpr std::uint64_t kDesign = 0x5801;
inline constexpr std::uint64_t kResponse = 0x7901;
inline constexpr std::uint64_t kRelease = 0x5201;
}  // namespace stream

inline Engine make_engine(Seed seed) { return Engine(seed); }

}  // namespace pkf
