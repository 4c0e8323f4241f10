#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace css {

/// SplitMix64 finalizer. Used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of the substream addressed by `path` under `master`.
///
/// The seed is a left fold of mix64 over the path:
///   h0 = mix64(master), h_{k+1} = mix64(h_k ^ mix64(path[k] + k + 1)).
/// Any (master, path) pair identifies one stream, so a grid point or slot can
/// be regenerated in isolation and the result does not depend on the order in
/// which workers visit it.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(master);
  std::uint64_t k = 0;
  for (auto p : path) h = mix64(h ^ mix64(p + (++k)));
  return h;
}

/// Seeded random stream. The engine is std::mt19937_64; the distributions come
/// from Boost.Random, whose algorithms are fixed, so draws are identical on
/// every standard library.
class Rng {
 public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) : engine_(derive_seed(master, path)) {}

  /// Uniform in [0, 1).
  double uniform() { return boost::random::uniform_01<double>{}(engine_); }

  /// Standard normal.
  double normal() { return normal_(engine_); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return boost::random::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  /// Fair +1 / -1.
  double sign() { return (engine_() >> 63) != 0 ? -1.0 : 1.0; }

  /// Fair bit.
  unsigned bit() { return static_cast<unsigned>(engine_() >> 63); }

  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace css
