#ifndef UQKIT_TOOLS_DEMO_H_
#define UQKIT_TOOLS_DEMO_H_

#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "uqkit/datasets.h"
#include "uqkit/metrics.h"
#include "uqkit/retention.h"
#include "uqkit/transfer.h"

namespace uqkit::tools {

// End-to-end transfer run on the synthetic upstream/downstream pair. The
// JSON form is documented in configs/README.md.
struct DemoConfig {
  Strategy strategy = Strategy::kDetFlip;
  std::uint64_t seed = 0;
  TrainConfig upstream_train;
  TrainConfig train;
  TransferTaskSpec dataset;
  std::vector<std::size_t> hidden = {32};
  TransferOptions options;
  std::size_t mc_samples = 30;
  std::size_t replications = kDefaultReplications;
  bool scratch_baseline = true;
};

// Unknown keys anywhere in the document are kConfigError.
DemoConfig DemoConfigFromJson(const nlohmann::json& doc);
nlohmann::json ToJson(const DemoConfig& cfg);

struct DemoResult {
  ToyNet upstream;
  TransferResult transfer;
  std::optional<ToyNet> scratch;
  double accuracy_fixed_feature = 0.0;
  double accuracy_fine_tuned = 0.0;
  std::optional<double> accuracy_scratch;
  McPredictions preds_test;
  McPredictions preds_ood;
  LabelSet labels_test;
  UncertaintyTriple uncertainty_test;
  UncertaintyTriple uncertainty_ood;
  MetricReport metrics;
  std::vector<RetentionCurve> retention;
  OodComparison ood;
  double seconds = 0.0;

  nlohmann::json Summary(const DemoConfig& cfg) const;
};

// All randomness derives from cfg.seed; the seed fields of the two train
// blocks are overwritten.
DemoResult RunDemo(const DemoConfig& cfg);

// Checkpoints, prediction tensors and reports under `dir`. Returns the
// paths written.
std::vector<std::filesystem::path> WriteDemoArtifacts(
    const DemoConfig& cfg, const DemoResult& result,
    const std::filesystem::path& dir);

}  // namespace uqkit::tools

#endif  // UQKIT_TOOLS_DEMO_H_
