#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace swar {

/// Seeded random stream. Every stochastic operation in the library takes one
/// of these explicitly; there is no global generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform() { return unit_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
  double normal() { return gauss_(engine_); }
  double normal(double mean, double stddev) { return mean + stddev * gauss_(engine_); }
  bool bernoulli(double p) { return unit_(engine_) < p; }
  std::size_t index(std::size_t n);
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

/// Hash a master seed and a label path into a child seed. Path order matters.
std::uint64_t derive_seed(std::uint64_t master_seed, std::span<const std::string> path);
std::uint64_t derive_seed(std::uint64_t master_seed, std::initializer_list<std::string_view> path);

/// Child stream for (master_seed, path), e.g. rng_tree(3, {"rl", "env"}).
Rng rng_tree(std::uint64_t master_seed, std::initializer_list<std::string_view> path);

}  // namespace swar
