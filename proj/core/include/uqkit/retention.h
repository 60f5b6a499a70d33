#ifndef UQKIT_RETENTION_H_
#define UQKIT_RETENTION_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "uqkit/types.h"

namespace uqkit {

inline constexpr std::size_t kDefaultReplications = 20;
inline constexpr double kCiZ = 1.96;

// 20 evenly spaced fractions 0.05, 0.10, ..., 1.00.
std::vector<double> DefaultFractions();

struct RetentionCurve {
  Measure measure = Measure::kEntropy;
  std::vector<double> fractions;
  std::vector<double> metric_mean;
  std::vector<double> ci_half_width;
  std::size_t replications = 1;
};

// Item indices sorted by ascending uncertainty, ties broken by index.
std::vector<std::size_t> RetentionOrder(std::span<const double> uncertainty);

// ceil(fraction * n) computed without float drift on exact products.
std::size_t RetainedCount(double fraction, std::size_t n);

// 1.96 * sample sd / sqrt(R); 0 when R == 1.
double ConfidenceHalfWidth(std::span<const double> values);

// Metric vs fraction retained. Each replication r bootstrap-resamples the
// MC-sample axis with Rng(seed + r), recomputes the chosen uncertainty, and
// scores the lowest-uncertainty prefix: accuracy for multiclass, macro mAP
// for multilabel.
RetentionCurve ComputeRetentionCurve(const McPredictions& preds,
                                     const LabelSet& labels, Measure measure,
                                     std::span<const double> fractions,
                                     std::size_t replications,
                                     std::uint64_t seed);

// Pointwise mean of per-fold curves that share measure and fractions.
RetentionCurve AverageFoldCurves(std::span<const RetentionCurve> folds);

struct BoxStats {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
  std::size_t n = 0;
};

// Type-7 (linear interpolation) quantile of already sorted data.
double SortedQuantile(std::span<const double> sorted, double q);

// Quartiles by linear interpolation; whiskers at the most extreme points
// within 1.5 IQR of the box. Throws kEmptyInput.
BoxStats ComputeBoxStats(std::span<const double> values);

struct OodComparison {
  // Indexed by Measure: entropy, aleatoric, epistemic.
  std::array<BoxStats, 3> in_dist;
  std::array<BoxStats, 3> ood;
  // ood mean - in-distribution mean.
  std::array<double, 3> mean_delta{};
};

OodComparison CompareOod(const UncertaintyTriple& in_dist,
                         const UncertaintyTriple& ood);

}  // namespace uqkit

#endif  // UQKIT_RETENTION_H_
