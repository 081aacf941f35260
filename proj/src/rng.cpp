#include "optimatch/rng.hpp"

namespace optimatch {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index, std::uint64_t sub) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ fnv1a(label));
  h = splitmix64(h ^ index);
  h = splitmix64(h ^ (sub + 0x632be59bd9b4e019ULL));
  return h;
}

Stream::Stream(std::uint64_t seed, std::string_view label, std::uint64_t index,
               std::uint64_t sub)
    : engine_(derive_seed(seed, label, index, sub)) {}

double Stream::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Stream::normal(double mean, double stddev) {
  // Always consumes a draw so a stream's later values do not depend on
  // whether stddev is zero.
  return mean + stddev * std::normal_distribution<double>(0.0, 1.0)(engine_);
}

bool Stream::bernoulli(double p) {
  if (p <= 0.0) return false;
  return std::bernoulli_distribution(p)(engine_);
}

int Stream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<int>(mean)(engine_);
}

std::size_t Stream::index_below(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

}  // namespace optimatch
