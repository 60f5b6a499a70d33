#include "demo.h"

#include <chrono>
#include <set>

#include "uqkit/checkpoint.h"
#include "uqkit/error.h"
#include "uqkit/reports.h"
#include "uqkit/tensor_io.h"
#include "uqkit/uncertainty.h"

namespace uqkit::tools {
namespace {

constexpr std::uint64_t kUpstreamSeedOffset = 1;
constexpr std::uint64_t kDownstreamSeedOffset = 2;
constexpr std::uint64_t kPredictStream = 7;
constexpr std::uint64_t kOodStream = 8;

void RejectUnknownKeys(const nlohmann::json& doc,
                       const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kConfigError, where + " must be an object");
  }
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) {
      throw Error(ErrorCode::kConfigError,
                  "unknown " + where + " field '" + key + "'");
    }
  }
}

TransferTaskSpec SpecFromJson(const nlohmann::json& doc) {
  RejectUnknownKeys(doc,
                    {"input_dim", "upstream_classes", "upstream_per_class",
                     "downstream_classes", "downstream_train",
                     "downstream_test", "radius", "spread", "nuisance",
                     "rotation"},
                    "dataset");
  TransferTaskSpec s;
  s.input_dim = doc.value("input_dim", s.input_dim);
  s.upstream_classes = doc.value("upstream_classes", s.upstream_classes);
  s.upstream_per_class = doc.value("upstream_per_class", s.upstream_per_class);
  s.downstream_classes = doc.value("downstream_classes", s.downstream_classes);
  s.downstream_train = doc.value("downstream_train", s.downstream_train);
  s.downstream_test = doc.value("downstream_test", s.downstream_test);
  s.radius = doc.value("radius", s.radius);
  s.spread = doc.value("spread", s.spread);
  s.nuisance = doc.value("nuisance", s.nuisance);
  s.rotation = doc.value("rotation", s.rotation);
  return s;
}

nlohmann::json SpecToJson(const TransferTaskSpec& s) {
  return {{"input_dim", s.input_dim},
          {"upstream_classes", s.upstream_classes},
          {"upstream_per_class", s.upstream_per_class},
          {"downstream_classes", s.downstream_classes},
          {"downstream_train", s.downstream_train},
          {"downstream_test", s.downstream_test},
          {"radius", s.radius},
          {"spread", s.spread},
          {"nuisance", s.nuisance},
          {"rotation", s.rotation}};
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

DemoConfig DemoConfigFromJson(const nlohmann::json& doc) {
  RejectUnknownKeys(doc,
                    {"strategy", "seed", "upstream_train", "train", "dataset",
                     "hidden", "moped_delta", "prior_sigma", "head_dropout",
                     "mc_samples", "replications", "scratch_baseline"},
                    "demo config");
  DemoConfig cfg;
  try {
    if (doc.contains("strategy")) {
      cfg.strategy = ParseStrategy(doc["strategy"].get<std::string>());
    }
    if (doc.contains("seed") && !doc["seed"].is_number_unsigned()) {
      throw Error(ErrorCode::kConfigError, "seed must be a non-negative integer");
    }
    cfg.seed = doc.value("seed", cfg.seed);
    if (doc.contains("upstream_train")) {
      cfg.upstream_train = TrainConfigFromJson(doc["upstream_train"]);
    }
    if (doc.contains("train")) cfg.train = TrainConfigFromJson(doc["train"]);
    if (doc.contains("dataset")) cfg.dataset = SpecFromJson(doc["dataset"]);
    if (doc.contains("hidden")) {
      cfg.hidden = doc["hidden"].get<std::vector<std::size_t>>();
    }
    cfg.options.moped_delta = doc.value("moped_delta", cfg.options.moped_delta);
    cfg.options.prior_sigma = doc.value("prior_sigma", cfg.options.prior_sigma);
    cfg.options.head_dropout =
        doc.value("head_dropout", cfg.options.head_dropout);
    cfg.mc_samples = doc.value("mc_samples", cfg.mc_samples);
    cfg.replications = doc.value("replications", cfg.replications);
    cfg.scratch_baseline = doc.value("scratch_baseline", cfg.scratch_baseline);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                "bad demo config: " + std::string(e.what()));
  }
  if (cfg.mc_samples < 1 || cfg.replications < 1) {
    throw Error(ErrorCode::kConfigError,
                "mc_samples and replications must be positive");
  }
  if (!(cfg.options.moped_delta > 0.0) || !(cfg.options.prior_sigma > 0.0)) {
    throw Error(ErrorCode::kConfigError,
                "moped_delta and prior_sigma must be positive");
  }
  if (!(cfg.options.head_dropout >= 0.0 && cfg.options.head_dropout < 1.0)) {
    throw Error(ErrorCode::kConfigError, "head_dropout must be in [0,1)");
  }
  return cfg;
}

nlohmann::json ToJson(const DemoConfig& cfg) {
  return {{"strategy", StrategyName(cfg.strategy)},
          {"seed", cfg.seed},
          {"upstream_train", ToJson(cfg.upstream_train)},
          {"train", ToJson(cfg.train)},
          {"dataset", SpecToJson(cfg.dataset)},
          {"hidden", cfg.hidden},
          {"moped_delta", cfg.options.moped_delta},
          {"prior_sigma", cfg.options.prior_sigma},
          {"head_dropout", cfg.options.head_dropout},
          {"mc_samples", cfg.mc_samples},
          {"replications", cfg.replications},
          {"scratch_baseline", cfg.scratch_baseline}};
}

DemoResult RunDemo(const DemoConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const TransferTask task = MakeTransferTask(cfg.dataset, cfg.seed);

  TrainConfig upstream_cfg = cfg.upstream_train;
  upstream_cfg.seed = cfg.seed + kUpstreamSeedOffset;
  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = cfg.seed + kDownstreamSeedOffset;

  ToyNet upstream = PretrainUpstream(cfg.strategy, task.upstream, cfg.hidden,
                                     upstream_cfg, cfg.options);
  TransferResult transfer = TransferTwoPhase(
      upstream, task.downstream_train, cfg.strategy, train_cfg, cfg.options);

  const Rng root(cfg.seed);
  const auto& test = task.downstream_test;
  McPredictions preds_test =
      McPredict(transfer.fine_tuned, test.x, cfg.mc_samples,
                root.Derive(kPredictStream));
  McPredictions preds_ood =
      McPredict(transfer.fine_tuned, task.ood_inputs, cfg.mc_samples,
                root.Derive(kOodStream));
  LabelSet labels = test.Labels();

  DemoResult r{std::move(upstream),
               std::move(transfer),
               std::nullopt,
               0.0,
               0.0,
               std::nullopt,
               preds_test,
               preds_ood,
               labels,
               Decompose(preds_test),
               Decompose(preds_ood),
               MacroMetrics(preds_test, labels),
               {},
               {},
               0.0};
  r.accuracy_fine_tuned =
      Accuracy(ComputeMeanProbabilities(preds_test), labels);
  auto accuracy_of = [&](const ToyNet& net) {
    const auto preds =
        McPredict(net, test.x, cfg.mc_samples, root.Derive(kPredictStream));
    return Accuracy(ComputeMeanProbabilities(preds), labels);
  };
  r.accuracy_fixed_feature = accuracy_of(r.transfer.fixed_feature);
  if (cfg.scratch_baseline) {
    r.scratch = TrainFromScratch(cfg.strategy, task.downstream_train,
                                 cfg.hidden, train_cfg, cfg.options);
    r.accuracy_scratch = accuracy_of(*r.scratch);
  }
  const auto fractions = DefaultFractions();
  for (auto m : {Measure::kEntropy, Measure::kAleatoric, Measure::kEpistemic}) {
    r.retention.push_back(ComputeRetentionCurve(
        preds_test, labels, m, fractions, cfg.replications, cfg.seed));
  }
  r.ood = CompareOod(r.uncertainty_test, r.uncertainty_ood);
  r.seconds = Seconds(start);
  return r;
}

nlohmann::json DemoResult::Summary(const DemoConfig& cfg) const {
  nlohmann::json doc = {
      {"strategy", StrategyName(cfg.strategy)},
      {"seed", cfg.seed},
      {"accuracy_fixed_feature", accuracy_fixed_feature},
      {"accuracy_fine_tuned", accuracy_fine_tuned},
      {"phase1_final_loss", transfer.phase1.epoch_loss.empty()
                                ? nlohmann::json(nullptr)
                                : nlohmann::json(transfer.phase1.epoch_loss.back())},
      {"phase2_final_loss", transfer.phase2.epoch_loss.empty()
                                ? nlohmann::json(nullptr)
                                : nlohmann::json(transfer.phase2.epoch_loss.back())},
      {"phase1_learning_rate", transfer.phase1.learning_rate},
      {"phase2_learning_rate", transfer.phase2.learning_rate},
      {"metrics", ToJson(metrics)},
      {"uncertainty_test", SummarizeTriple(uncertainty_test)},
      {"uncertainty_ood", SummarizeTriple(uncertainty_ood)}};
  doc["accuracy_scratch"] = accuracy_scratch
                                ? nlohmann::json(*accuracy_scratch)
                                : nlohmann::json(nullptr);
  if (cfg.strategy == Strategy::kDetFlip) {
    doc["moped_delta"] = cfg.options.moped_delta;
  }
  return doc;
}

std::vector<std::filesystem::path> WriteDemoArtifacts(
    const DemoConfig& cfg, const DemoResult& result,
    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  nlohmann::json extra = {{"strategy", StrategyName(cfg.strategy)}};
  if (cfg.strategy == Strategy::kDetFlip) {
    extra["moped_delta"] = cfg.options.moped_delta;
  }
  auto checkpoint = [&](const ToyNet& net, const std::string& name) {
    SaveCheckpoint(net, dir / name, cfg.seed, extra);
    written.push_back(dir / name);
  };
  checkpoint(result.upstream, "upstream");
  checkpoint(result.transfer.fixed_feature, "fixed_feature");
  checkpoint(result.transfer.fine_tuned, "fine_tuned");
  if (result.scratch) checkpoint(*result.scratch, "scratch");

  auto npy = [&](const std::string& name, const TensorFile& t) {
    WriteNpyFile(dir / name, t);
    written.push_back(dir / name);
  };
  npy("preds_test.npy", PredictionsToTensor(result.preds_test));
  npy("labels_test.npy", LabelsToTensor(result.labels_test));
  npy("preds_ood.npy", PredictionsToTensor(result.preds_ood));
  npy("uncertainty_test.npy", TripleToTensor(result.uncertainty_test));
  npy("uncertainty_ood.npy", TripleToTensor(result.uncertainty_ood));

  auto text = [&](const std::string& name, const std::string& body) {
    WriteFileAtomic(dir / name, body);
    written.push_back(dir / name);
  };
  text("metrics.json", ToJson(result.metrics).dump(2) + "\n");
  text("retention.csv", RetentionCsv(result.retention));
  text("ood.json", ToJson(result.ood, "in_dist", "ood").dump(2) + "\n");
  text("config.json", ToJson(cfg).dump(2) + "\n");
  text("summary.json", result.Summary(cfg).dump(2) + "\n");
  return written;
}

}  // namespace uqkit::tools
