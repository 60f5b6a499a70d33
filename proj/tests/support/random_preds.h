#ifndef UQKIT_TESTS_SUPPORT_RANDOM_PREDS_H_
#define UQKIT_TESTS_SUPPORT_RANDOM_PREDS_H_

#include <cmath>
#include <vector>

#include "uqkit/rng.h"
#include "uqkit/types.h"

namespace uqkit::testing {

// Softmax of scaled normal logits (multiclass) or independent sigmoids
// (multilabel). A large `scale` pushes probabilities toward 0 and 1.
inline std::vector<double> RandomProbabilities(std::size_t m, std::size_t n,
                                               std::size_t c, Task task,
                                               double scale, Rng& rng) {
  std::vector<double> out(m * n * c);
  for (std::size_t row = 0; row < m * n; ++row) {
    double* p = out.data() + row * c;
    if (task == Task::kMultilabel) {
      for (std::size_t k = 0; k < c; ++k) {
        p[k] = 1.0 / (1.0 + std::exp(-scale * rng.Normal()));
      }
      continue;
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      p[k] = std::exp(scale * rng.Normal());
      sum += p[k];
    }
    for (std::size_t k = 0; k < c; ++k) p[k] /= sum;
  }
  return out;
}

inline McPredictions RandomPredictions(std::size_t m, std::size_t n,
                                       std::size_t c, Task task, double scale,
                                       Rng& rng) {
  return McPredictions(RandomProbabilities(m, n, c, task, scale, rng), m, n, c,
                       task);
}

// Every sample equal to the first one.
inline McPredictions RepeatFirstSample(const McPredictions& preds,
                                       std::size_t m) {
  std::vector<std::size_t> ids(m, 0);
  return preds.SelectSamples(ids);
}

}  // namespace uqkit::testing

#endif  // UQKIT_TESTS_SUPPORT_RANDOM_PREDS_H_
