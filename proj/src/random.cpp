#include "acps/random.hpp"

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace acps {

Rng make_rng(std::uint64_t seed) { return Rng{mix64(seed)}; }

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key1, std::uint64_t key2) {
  return mix64(seed ^ mix64(key1 ^ mix64(key2 + 0x632be59bd9b4e019ULL)));
}

std::uint64_t hash_key(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double draw_normal(Rng &rng) {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

double draw_uniform(Rng &rng) {
  boost::random::uniform_01<double> dist;
  return dist(rng);
}

double draw_gamma(Rng &rng, double shape) {
  boost::random::gamma_distribution<double> dist(shape, 1.0);
  return dist(rng);
}

} // namespace acps
