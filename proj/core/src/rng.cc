#include "uqkit/rng.h"

#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace uqkit {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t Mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), key_(Mix(seed ^ Mix(stream + kGolden))) {}

Rng::result_type Rng::operator()() {
  ++counter_;
  return Mix(key_ + counter_ * kGolden);
}

Rng Rng::Derive(std::uint64_t stream) const {
  return Rng(Mix(key_ ^ 0x5851f42d4c957f2dULL), stream);
}

double Rng::Uniform() {
  // 53 high bits -> exact dyadic in [0, 1).
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Rng::Normal() {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(*this);
}

double Rng::Rademacher() { return ((*this)() >> 63) ? 1.0 : -1.0; }

bool Rng::Bernoulli(double p) { return Uniform() < p; }

double Rng::Beta(double a, double b) {
  boost::random::beta_distribution<double> dist(a, b);
  return dist(*this);
}

std::size_t Rng::UniformIndex(std::size_t n) {
  boost::random::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(*this);
}

void Rng::Shuffle(std::span<std::size_t> values) {
  // Fisher-Yates with our own index draw; std::shuffle's algorithm is
  // implementation-defined and would break cross-platform replay.
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[UniformIndex(i)]);
  }
}

}  // namespace uqkit
