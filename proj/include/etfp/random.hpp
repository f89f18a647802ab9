#ifndef ETFP_RANDOM_HPP_
#define ETFP_RANDOM_HPP_

#include <cstdint>
#include <random>

namespace etfp {

// Generator used for all simulation noise and coalition sampling. Streams are
// reproducible per implementation given the seed, not across standard
// libraries (normal_distribution is implementation defined).
using Generator = std::mt19937_64;

// splitmix64 finalizer: a bijective avalanche mix of one 64-bit word.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of trial `trial` for coalition-size slot `k_index` under
// `master_seed`: three chained splitmix64 rounds, each absorbing one word.
constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t k_index,
                                   std::uint64_t trial) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ k_index);
  h = splitmix64(h ^ trial);
  return h;
}

}  // namespace etfp

#endif  // ETFP_RANDOM_HPP_
