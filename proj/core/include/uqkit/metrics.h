#ifndef UQKIT_METRICS_H_
#define UQKIT_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "uqkit/types.h"

namespace uqkit {

// Fraction of items whose argmax (lowest index on ties) equals the label.
double Accuracy(const MeanProbabilities& mean, const LabelSet& labels);

// Step-integrated average precision. Items with equal scores enter the
// ranking together. Throws kNoPositives.
double AveragePrecision(std::span<const double> scores,
                        std::span<const std::uint8_t> positives);

// Mann-Whitney AUC with half credit for ties. Throws kDegenerateClass when
// either class is empty.
double Auc(std::span<const double> scores,
           std::span<const std::uint8_t> positives);

double NormalCdf(double x);
// Standard normal quantile, |error| < 1e-8 on (0,1).
double NormalQuantile(double p);

// sqrt(2) * Phi^-1(auc). Throws kDomainError unless 0 < auc < 1.
double DPrime(double auc);

struct MetricReport {
  std::optional<double> accuracy;  // multiclass only
  double map_macro = 0.0;
  double auc_macro = 0.0;
  double d_prime = 0.0;
  // Set when auc_macro is 0 or 1 and d_prime holds -inf / +inf.
  bool d_prime_saturated = false;
  std::vector<std::optional<double>> per_class_ap;
  std::vector<std::optional<double>> per_class_auc;
  // Classes missing from at least one of the macro averages.
  std::vector<std::size_t> skipped_classes;
};

// Scores are the sample-mean probabilities. For multiclass, positives of
// class c are the items labelled c. Throws kAllClassesSkipped.
MetricReport MacroMetrics(const McPredictions& preds, const LabelSet& labels);

// Macro mAP alone, used where AUC/d-prime are not needed.
double MacroAveragePrecision(const MeanProbabilities& mean,
                             const LabelSet& labels);

}  // namespace uqkit

#endif  // UQKIT_METRICS_H_
