#ifndef DSAAE_RNG_HPP
#define DSAAE_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

#include "dsaae/core.hpp"

namespace dsaae {

using Rng = std::mt19937_64;

/// Generator seeded from a list of integers, so that (seed, epoch) or
/// (seed, step) pairs give independent reproducible streams.
inline Rng make_rng(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (auto p : parts) {
    words.push_back(static_cast<std::uint32_t>(p & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

inline Matrix standard_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = normal(rng);
  return out;
}

}  // namespace dsaae

#endif  // DSAAE_RNG_HPP
