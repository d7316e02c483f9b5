#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace uclab {

// Deterministic RNG with named sub-streams. Every run owns a single root
// generator; each stochastic component derives its own stream via child(), so
// adding or removing draws in one component never perturbs another. xoshiro256++
// state, seeded through splitmix64. Hand-rolled on purpose: stream derivation
// and cross-platform bit-stability matter more here than raw statistical
// pedigree, and std::mt19937's distributions are not bit-stable across
// implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& w : state_) w = splitmix(x);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0, 1)
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller; draws exactly two uniforms per call so the
  // consumption pattern is predictable for stream-equivalence tests
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // integer in [0, n)
  std::uint64_t randint(std::uint64_t n) {
    // Lemire-style rejection-free-enough bound; exact uniformity via rejection
    if (n == 0) return 0;
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Derived stream, fixed by (root seed, name, index) only — independent of how
  // much the parent has been consumed.
  Rng child(std::string_view name, std::uint64_t index = 0) const {
    std::uint64_t x = seed_ ^ 0x6a09e667f3bcc908ull;
    x ^= fnv1a(name);
    (void)splitmix(x);
    x ^= index * 0x9e3779b97f4a7c15ull;
    (void)splitmix(x);
    return Rng(x);
  }

  std::uint64_t seed() const { return seed_; }

private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  static std::uint64_t splitmix(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : s) {
      h ^= std::uint64_t(static_cast<unsigned char>(c));
      h *= 0x100000001b3ull;
    }
    return h;
  }

  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace uclab
