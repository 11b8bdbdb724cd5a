#include "entlab/rng.hpp"

#include "entlab/errors.hpp"

namespace entlab::rng {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, Purpose purpose, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  return splitmix64(h ^ splitmix64(index));
}

Engine make_engine(std::uint64_t seed, Purpose purpose, std::uint64_t index) {
  return Engine(derive_seed(seed, purpose, index));
}

std::uint64_t poisson(Engine& engine, double mean) {
  if (!(mean >= 0.0)) throw InvalidArgument("poisson: negative or NaN mean");
  if (mean == 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine);
}

std::uint64_t binomial(Engine& engine, std::uint64_t trials, double p) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::binomial_distribution<std::uint64_t> dist(trials, p);
  return dist(engine);
}

}  // namespace entlab::rng
