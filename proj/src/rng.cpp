#include "fw/rng.hpp"

#include <cmath>
#include <numbers>

namespace fw {
namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix64(mix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1))) {}

CounterRng CounterRng::split(std::uint64_t child) const {
  return CounterRng(seed_, mix64(stream_ + 0x632be59bd9b4e019ULL) ^ mix64(child));
}

std::uint64_t CounterRng::next_u64() { return mix64(key_ ^ mix64(counter_++)); }

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t CounterRng::uniform_index(std::size_t n) {
  require(n > 0, "uniform_index: n must be positive");
  // multiply-shift; bias is below 2^-64 * n, irrelevant here
  const unsigned __int128 prod = static_cast<unsigned __int128>(next_u64()) * n;
  return static_cast<std::size_t>(prod >> 64);
}

double CounterRng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec CounterRng::normal_vector(Index n) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Vec CounterRng::unit_vector(Index n) {
  require(n > 0, "unit_vector: n must be positive");
  Vec v = normal_vector(n);
  double nrm = v.norm();
  while (nrm == 0.0) {
    v = normal_vector(n);
    nrm = v.norm();
  }
  return v / nrm;
}

}  // namespace fw
