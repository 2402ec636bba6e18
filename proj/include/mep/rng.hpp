#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mep {

// Deterministic random stream. All stochastic code receives one of these
// explicitly; substreams are derived from (base seed, id) so concurrent or
// per-stage use stays reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : base_seed_(seed), engine_(mix(seed)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(engine_);
  }

  std::vector<double> normal_vec(std::size_t n) {
    std::vector<double> out(n);
    for (auto& x : out) x = normal();
    return out;
  }

  // Independent substream, deterministic in (base seed, id).
  Rng derive(std::uint64_t id) const { return Rng(mix(base_seed_ + 0x9e3779b97f4a7c15ull * (id + 1))); }

  std::uint64_t base_seed() const { return base_seed_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t base_seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace mep
