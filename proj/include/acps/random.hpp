#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace acps {

/// Every stochastic routine takes an explicit 64-bit seed and builds a local
/// engine from it. The engine is the standard 64-bit Mersenne Twister, whose
/// output sequence is fixed by the C++ standard; variates are drawn with
/// Boost.Random distributions, whose algorithms do not vary between standard
/// library implementations.
using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed);

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives a child seed from a parent seed and two keys. Used to give every
/// (vintage, model, horizon) work item an independent stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key1, std::uint64_t key2 = 0);

/// 64-bit FNV-1a hash of a string, for turning model ids into seed keys.
std::uint64_t hash_key(std::string_view text);

double draw_normal(Rng &rng);
double draw_uniform(Rng &rng);
/// Gamma(shape, scale=1).
double draw_gamma(Rng &rng, double shape);

} // namespace acps
