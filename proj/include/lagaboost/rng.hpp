#pragma once

#include <boost/random/mersenne_twister.hpp>
#include <cstdint>

namespace lagaboost {

/// Mersenne Twister (mt19937_64) seeded from SplitMix64(seed, stream).
/// Distributions come from Boost.Random so draws match across platforms.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double normal();
  double uniform();  ///< [0, 1)
  double uniform(double lo, double hi);
  bool bernoulli(double p);
  long poisson(double mean);
  std::uint64_t uniform_index(std::uint64_t n);  ///< [0, n)

  boost::random::mt19937_64& engine() { return engine_; }

 private:
  boost::random::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for an independent sub-stream, e.g. replicate r of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace lagaboost
