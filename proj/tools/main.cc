#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "demo.h"
#include "run_manifest.h"
#include "uqkit/error.h"
#include "uqkit/metrics.h"
#include "uqkit/reports.h"
#include "uqkit/retention.h"
#include "uqkit/tensor_io.h"
#include "uqkit/uncertainty.h"
#include "uqkit/version.h"

namespace fs = std::filesystem;
using uqkit::tools::RunManifest;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNumeric = 3;

fs::path ManifestPathFor(const fs::path& out) {
  return fs::path(out.string() + ".manifest.json");
}

// Runs `body`, maps failures to exit codes and always leaves a manifest.
int Guarded(RunManifest& manifest, const fs::path& manifest_path,
            const std::function<void()>& body) {
  int code = kExitOk;
  std::string error;
  try {
    body();
  } catch (const uqkit::Error& e) {
    code = uqkit::IsNumericFailure(e.code()) ? kExitNumeric : kExitInvalid;
    error = e.what();
  } catch (const std::exception& e) {
    code = kExitInvalid;
    error = std::string("IoError: ") + e.what();
  }
  if (!error.empty()) std::cerr << "uqkit: " << error << "\n";
  try {
    if (manifest_path.has_parent_path()) {
      fs::create_directories(manifest_path.parent_path());
    }
    manifest.Write(manifest_path, code, error);
  } catch (const std::exception& e) {
    std::cerr << "uqkit: cannot write manifest: " << e.what() << "\n";
  }
  return code;
}

uqkit::Task TaskFrom(const std::string& name) { return uqkit::ParseTask(name); }

void WriteText(RunManifest& manifest, const fs::path& path,
               const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  uqkit::WriteFileAtomic(path, text);
  manifest.AddOutput(path);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Uncertainty decomposition, evaluation and toy VI runs"};
  app.set_version_flag("--version", uqkit::kVersion);
  app.require_subcommand(1);

  std::string task_name = "multiclass";
  fs::path preds_path, labels_path, out_path;
  std::uint64_t seed = 0;

  auto* decompose = app.add_subcommand(
      "decompose", "Per-item total/aleatoric/epistemic uncertainty");
  fs::path summary_path;
  decompose->add_option("--preds", preds_path, "[M,N,C] probabilities (.npy)")
      ->required();
  decompose->add_option("--task", task_name, "multiclass | multilabel")
      ->required();
  decompose->add_option("--out", out_path, "[N,3] triple output (.npy)")
      ->required();
  decompose->add_option("--summary", summary_path,
                        "JSON summary (default <out>.summary.json)");

  auto* retention = app.add_subcommand(
      "retention", "Metric versus fraction of data retained");
  std::vector<std::string> measures;
  std::size_t replications = uqkit::kDefaultReplications;
  std::vector<double> fractions;
  retention->add_option("--preds", preds_path)->required();
  retention->add_option("--labels", labels_path, "<i8 labels (.npy)")
      ->required();
  retention->add_option("--task", task_name);
  retention->add_option("--measure", measures,
                        "entropy | aleatoric | epistemic (default all)");
  retention->add_option("--replications", replications)
      ->check(CLI::PositiveNumber);
  retention->add_option("--fractions", fractions,
                        "ascending fractions in (0,1] (default 0.05..1)");
  retention->add_option("--seed", seed);
  retention->add_option("--out", out_path, "CSV output")->required();

  auto* metrics = app.add_subcommand("metrics", "mAP, AUC and d-prime");
  metrics->add_option("--preds", preds_path)->required();
  metrics->add_option("--labels", labels_path)->required();
  metrics->add_option("--task", task_name);
  metrics->add_option("--out", out_path, "JSON output")->required();

  auto* ood = app.add_subcommand(
      "ood-compare", "Box statistics of uncertainty on two datasets");
  fs::path preds_ood_path;
  ood->add_option("--preds-in", preds_path)->required();
  ood->add_option("--preds-ood", preds_ood_path)->required();
  ood->add_option("--task", task_name);
  ood->add_option("--out", out_path, "JSON output")->required();

  auto* demo = app.add_subcommand(
      "demo", "Synthetic transfer-learning run with MC uncertainty");
  fs::path config_path;
  std::optional<std::uint64_t> seed_override;
  std::string strategy_override;
  demo->add_option("--config", config_path, "demo config JSON")->required();
  demo->add_option("--out", out_path, "output directory")->required();
  demo->add_option("--seed", seed_override, "overrides the config seed");
  demo->add_option("--strategy", strategy_override,
                   "flip | det_flip | drop (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  if (*decompose) {
    RunManifest manifest("decompose", args);
    if (summary_path.empty()) {
      summary_path = fs::path(out_path.string() + ".summary.json");
    }
    return Guarded(manifest, ManifestPathFor(out_path), [&] {
      manifest.AddInput("preds", preds_path);
      const auto preds = uqkit::LoadPredictions(preds_path, TaskFrom(task_name));
      const auto triple = uqkit::Decompose(preds);
      if (out_path.has_parent_path()) {
        fs::create_directories(out_path.parent_path());
      }
      uqkit::WriteNpyFile(out_path, uqkit::TripleToTensor(triple));
      manifest.AddOutput(out_path);
      nlohmann::json summary = uqkit::SummarizeTriple(triple);
      summary["task"] = uqkit::TaskName(preds.task());
      WriteText(manifest, summary_path, summary.dump(2) + "\n");
    });
  }

  if (*retention) {
    RunManifest manifest("retention", args);
    manifest.SetSeed(seed);
    return Guarded(manifest, ManifestPathFor(out_path), [&] {
      manifest.AddInput("preds", preds_path);
      manifest.AddInput("labels", labels_path);
      const auto task = TaskFrom(task_name);
      const auto preds = uqkit::LoadPredictions(preds_path, task);
      const auto labels = uqkit::LoadLabels(labels_path, task, preds.items(),
                                            preds.classes());
      if (measures.empty()) measures = {"entropy", "aleatoric", "epistemic"};
      if (fractions.empty()) fractions = uqkit::DefaultFractions();
      std::vector<uqkit::RetentionCurve> curves;
      for (const auto& name : measures) {
        curves.push_back(uqkit::ComputeRetentionCurve(
            preds, labels, uqkit::ParseMeasure(name), fractions, replications,
            seed));
      }
      WriteText(manifest, out_path, uqkit::RetentionCsv(curves));
    });
  }

  if (*metrics) {
    RunManifest manifest("metrics", args);
    return Guarded(manifest, ManifestPathFor(out_path), [&] {
      manifest.AddInput("preds", preds_path);
      manifest.AddInput("labels", labels_path);
      const auto task = TaskFrom(task_name);
      const auto preds = uqkit::LoadPredictions(preds_path, task);
      const auto labels = uqkit::LoadLabels(labels_path, task, preds.items(),
                                            preds.classes());
      const auto report = uqkit::MacroMetrics(preds, labels);
      WriteText(manifest, out_path, uqkit::ToJson(report).dump(2) + "\n");
    });
  }

  if (*ood) {
    RunManifest manifest("ood-compare", args);
    return Guarded(manifest, ManifestPathFor(out_path), [&] {
      manifest.AddInput("preds_in", preds_path);
      manifest.AddInput("preds_ood", preds_ood_path);
      const auto task = TaskFrom(task_name);
      const auto in = uqkit::LoadPredictions(preds_path, task);
      const auto out = uqkit::LoadPredictions(preds_ood_path, task);
      if (in.classes() != out.classes()) {
        throw uqkit::Error(uqkit::ErrorCode::kShapeError,
                           "class counts differ: " +
                               std::to_string(in.classes()) + " vs " +
                               std::to_string(out.classes()));
      }
      const auto cmp =
          uqkit::CompareOod(uqkit::Decompose(in), uqkit::Decompose(out));
      WriteText(manifest, out_path, uqkit::ToJson(cmp).dump(2) + "\n");
    });
  }

  if (*demo) {
    RunManifest manifest("demo", args);
    return Guarded(manifest, out_path / "manifest.json", [&] {
      manifest.AddInput("config", config_path);
      std::ifstream in(config_path);
      if (!in) {
        throw uqkit::Error(uqkit::ErrorCode::kIoError,
                           "cannot open " + config_path.string());
      }
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw uqkit::Error(uqkit::ErrorCode::kConfigError, e.what());
      }
      auto cfg = uqkit::tools::DemoConfigFromJson(doc);
      if (seed_override) cfg.seed = *seed_override;
      if (!strategy_override.empty()) {
        cfg.strategy = uqkit::ParseStrategy(strategy_override);
      }
      manifest.SetSeed(cfg.seed);
      manifest.SetExtra("strategy", std::string(StrategyName(cfg.strategy)));
      if (cfg.strategy == uqkit::Strategy::kDetFlip) {
        manifest.SetExtra("moped_delta", cfg.options.moped_delta);
      }
      const auto result = uqkit::tools::RunDemo(cfg);
      for (const auto& path :
           uqkit::tools::WriteDemoArtifacts(cfg, result, out_path)) {
        manifest.AddOutput(path);
      }
      std::cout << "strategy " << StrategyName(cfg.strategy)
                << "  fixed-feature acc "
                << uqkit::FormatDouble(result.accuracy_fixed_feature)
                << "  fine-tuned acc "
                << uqkit::FormatDouble(result.accuracy_fine_tuned);
      if (result.accuracy_scratch) {
        std::cout << "  scratch acc "
                  << uqkit::FormatDouble(*result.accuracy_scratch);
      }
      std::cout << "  (" << result.seconds << " s)\n";
    });
  }
  return kExitInvalid;
}
