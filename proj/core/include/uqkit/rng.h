#ifndef UQKIT_RNG_H_
#define UQKIT_RNG_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace uqkit {

// Counter-based generator: the n-th output is a pure function of
// (seed, stream, n), so streams can be derived and replayed independently.
// Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  // Independent child stream; does not advance this generator.
  Rng Derive(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  // [0, 1)
  double Uniform();
  double Normal();
  double Rademacher();
  bool Bernoulli(double p);
  double Beta(double a, double b);
  std::size_t UniformIndex(std::size_t n);
  void Shuffle(std::span<std::size_t> values);

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace uqkit

#endif  // UQKIT_RNG_H_
