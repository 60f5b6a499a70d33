#ifndef UQKIT_UNCERTAINTY_H_
#define UQKIT_UNCERTAINTY_H_

#include <span>
#include <vector>

#include "uqkit/types.h"

namespace uqkit {

// Probabilities are clamped to [kLogClamp, 1 - kLogClamp] inside ln() only;
// stored means are never clamped.
inline constexpr double kLogClamp = 1e-12;

// p * ln p with 0 ln 0 = 1 ln 1 = 0.
double XLogX(double p);

// -p ln p - (1-p) ln(1-p) in nats. Throws kDomainError outside [0,1].
double BinaryEntropy(double p);

// -sum_c p_c ln p_c in nats.
double CategoricalEntropy(std::span<const double> probs);

// Average over the M axis.
MeanProbabilities ComputeMeanProbabilities(const McPredictions& preds);

// Softmax decomposition: total = H[mean], aleatoric = mean_m H[sample_m],
// epistemic = total - aleatoric. Throws kTaskMismatch on multilabel input.
UncertaintyTriple DecomposeMulticlass(const McPredictions& preds);

// Independent-binary decomposition, summed over classes.
UncertaintyTriple DecomposeMultilabel(const McPredictions& preds);

// Per-class multilabel terms before summation, each N x C row-major.
struct PerClassUncertainty {
  std::vector<double> total;
  std::vector<double> aleatoric;
  std::vector<double> epistemic;
  std::size_t items = 0;
  std::size_t classes = 0;
};
PerClassUncertainty DecomposeMultilabelPerClass(const McPredictions& preds);

// Dispatch on preds.task().
UncertaintyTriple Decompose(const McPredictions& preds);

}  // namespace uqkit

#endif  // UQKIT_UNCERTAINTY_H_
