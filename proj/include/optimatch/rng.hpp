#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace optimatch {

// Mixes a master seed with a purpose label and up to two indices into an
// independent 64-bit seed (FNV-1a over the label, splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index = 0, std::uint64_t sub = 0);

// A named random stream. Two streams built from the same
// (seed, label, index, sub) produce identical sequences.
class Stream {
 public:
  Stream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0,
         std::uint64_t sub = 0);

  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  bool bernoulli(double p);
  int poisson(double mean);
  // Uniform integer in [0, n).
  std::size_t index_below(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace optimatch
