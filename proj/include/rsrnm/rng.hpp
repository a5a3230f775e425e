#pragma once

#include <cstdint>
#include <random>

namespace rsrnm {

/// SplitMix64 finalizer. Bijective on 64-bit words, used to derive stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed of child stream `stream` under `seed`. Distinct (seed, stream) pairs map
/// to distinct, well-mixed engine seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seedable, splittable generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform doubles take the top 53 bits of one engine word. Normals
/// use the Box-Muller transform on two uniforms and return both variates of a
/// pair in order (cosine branch first). std::normal_distribution is avoided
/// since its algorithm is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent child generator; does not advance this generator.
  Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  /// Standard normal N(0, 1).
  double normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rsrnm
