#include "lagaboost/rng.hpp"

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <stdexcept>

namespace lagaboost {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  s = a ^ (stream * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL);
  return splitmix64(s);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(derive_seed(seed, stream)) {}

double Rng::normal() { return boost::random::normal_distribution<double>(0.0, 1.0)(engine_); }

double Rng::uniform() { return boost::random::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double Rng::uniform(double lo, double hi) { return boost::random::uniform_real_distribution<double>(lo, hi)(engine_); }

bool Rng::bernoulli(double p) { return boost::random::bernoulli_distribution<double>(p)(engine_); }

long Rng::poisson(double mean) {
  if (!(mean > 0.0)) {
    if (mean == 0.0) return 0;
    throw std::domain_error("poisson mean must be non-negative");
  }
  return boost::random::poisson_distribution<long, double>(mean)(engine_);
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  return boost::random::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

}  // namespace lagaboost
