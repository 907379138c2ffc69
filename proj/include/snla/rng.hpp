#pragma once

#include <cstdint>
#include <random>

namespace snla {

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x);
// Counter-mode stream keyed by seed: value i of stream `key`.
std::uint64_t counter_hash(std::uint64_t key, std::uint64_t i);
// Independent child seed for a named purpose.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return eng_(); }
  // (0, 1), never exactly 0
  double uniform();
  double normal() { return normal_(eng_); }
  double cauchy();
  double exponential();
  std::size_t index(std::size_t n);
  double sign() { return (eng_() >> 63) ? 1.0 : -1.0; }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace snla
