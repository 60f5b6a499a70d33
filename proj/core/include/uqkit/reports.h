#ifndef UQKIT_REPORTS_H_
#define UQKIT_REPORTS_H_

#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "uqkit/metrics.h"
#include "uqkit/retention.h"
#include "uqkit/tensor_io.h"
#include "uqkit/training.h"

namespace uqkit {

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double value);

// Flat document with the MetricReport fields. Infinite d-prime is written
// as null alongside "d_prime_saturated": true.
nlohmann::json ToJson(const MetricReport& report);
nlohmann::json ToJson(const BoxStats& stats);
// {"entropy": {"<in_tag>": box, "<ood_tag>": box}, ..., "mean_delta": {...}}
nlohmann::json ToJson(const OodComparison& comparison,
                      const std::string& in_tag = "in_dist",
                      const std::string& ood_tag = "ood");

// One JSON summary per measure of a per-item triple.
nlohmann::json SummarizeTriple(const UncertaintyTriple& triple);

// CSV with header measure,fraction,metric_mean,ci_half_width,replications.
std::string RetentionCsv(std::span<const RetentionCurve> curves);

// [N, 3] f64 tensor with columns total, aleatoric, epistemic.
TensorFile TripleToTensor(const UncertaintyTriple& triple);

// Exactly the TrainConfig field names; unknown keys are kConfigError.
TrainConfig TrainConfigFromJson(const nlohmann::json& doc);
nlohmann::json ToJson(const TrainConfig& cfg);

}  // namespace uqkit

#endif  // UQKIT_REPORTS_H_
