#ifndef UQKIT_DATASETS_H_
#define UQKIT_DATASETS_H_

#include <cstddef>
#include <cstdint>

#include "uqkit/training.h"
#include "uqkit/types.h"

namespace uqkit {

// Two interleaved half circles with Gaussian jitter, 2 classes.
Dataset MakeTwoMoons(std::size_t n, double noise, Rng& rng);

// Shape of the synthetic upstream/downstream pair. Both tasks live in the
// same input space: a 2-D latent embedded into `input_dim` dimensions by a
// fixed random projection, plus isotropic nuisance noise. Upstream classes
// sit on a circle; downstream classes sit on the same circle rotated by
// `rotation` radians.
struct TransferTaskSpec {
  std::size_t input_dim = 16;
  std::size_t upstream_classes = 8;
  std::size_t upstream_per_class = 100;
  std::size_t downstream_classes = 4;
  std::size_t downstream_train = 40;
  std::size_t downstream_test = 400;
  double radius = 3.0;
  double spread = 0.6;
  double nuisance = 1.0;
  double rotation = 0.3926990816987241;  // pi / 8
};

struct TransferTask {
  Dataset upstream;
  Dataset downstream_train;
  Dataset downstream_test;
  // Far-from-support inputs for OOD comparisons.
  Matrix ood_inputs;
};

TransferTask MakeTransferTask(const TransferTaskSpec& spec, std::uint64_t seed);

// MC predictions from a simulated calibrated classifier: labels are drawn
// from the mean predictive distribution and harder items get both flatter
// means and more spread between passes, so discarding uncertain items
// raises accuracy.
struct SyntheticInstance {
  McPredictions preds;
  LabelSet labels;
};

SyntheticInstance MakeCalibratedInstance(std::size_t items,
                                         std::size_t samples,
                                         std::size_t classes,
                                         std::uint64_t seed);

}  // namespace uqkit

#endif  // UQKIT_DATASETS_H_
