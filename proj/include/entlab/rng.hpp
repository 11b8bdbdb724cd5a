#pragma once

// Every random draw flows from one 64-bit run seed. A stream is identified by
// (seed, purpose, index); distinct triples give statistically independent
// mt19937_64 engines seeded through splitmix64.

#include <cstdint>
#include <random>

namespace entlab::rng {

using Engine = std::mt19937_64;

enum class Purpose : std::uint64_t {
  tomography_counts = 1,
  witness_counts = 2,
  histogram = 3,
  bootstrap = 4,
  calibration = 5,
  test = 99,
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, Purpose purpose, std::uint64_t index = 0);
Engine make_engine(std::uint64_t seed, Purpose purpose, std::uint64_t index = 0);

// Poisson draw that accepts a zero mean.
std::uint64_t poisson(Engine& engine, double mean);
std::uint64_t binomial(Engine& engine, std::uint64_t trials, double p);

}  // namespace entlab::rng
