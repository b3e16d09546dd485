#pragma once

#include <cstdint>
#include <random>

namespace stiefeldp {

// Seeded random stream. All stochastic operations take one of these by
// reference; independent streams come from split().
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  double uniform();  // [0, 1)
  double normal();
  double gamma(double shape);
  double beta(double a, double b);
  std::uint64_t next_u64() { return engine_(); }

  // Deterministic child stream; distinct `stream` values give distinct sequences.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace stiefeldp
