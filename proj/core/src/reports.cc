#include "uqkit/reports.h"

#include <charconv>
#include <cmath>
#include <set>

#include "uqkit/error.h"

namespace uqkit {
namespace {

nlohmann::json OptionalArray(const std::vector<std::optional<double>>& values) {
  auto out = nlohmann::json::array();
  for (const auto& v : values) {
    if (v) {
      out.push_back(*v);
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

constexpr Measure kMeasures[] = {Measure::kEntropy, Measure::kAleatoric,
                                 Measure::kEpistemic};

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

nlohmann::json ToJson(const MetricReport& report) {
  nlohmann::json doc;
  if (report.accuracy) {
    doc["accuracy"] = *report.accuracy;
  } else {
    doc["accuracy"] = nullptr;
  }
  doc["map_macro"] = report.map_macro;
  doc["auc_macro"] = report.auc_macro;
  if (std::isfinite(report.d_prime)) {
    doc["d_prime"] = report.d_prime;
  } else {
    doc["d_prime"] = nullptr;
  }
  doc["d_prime_saturated"] = report.d_prime_saturated;
  doc["per_class_ap"] = OptionalArray(report.per_class_ap);
  doc["per_class_auc"] = OptionalArray(report.per_class_auc);
  doc["skipped_classes"] = report.skipped_classes;
  return doc;
}

nlohmann::json ToJson(const BoxStats& stats) {
  return {{"mean", stats.mean},         {"median", stats.median},
          {"q1", stats.q1},             {"q3", stats.q3},
          {"whisker_lo", stats.whisker_lo}, {"whisker_hi", stats.whisker_hi},
          {"n", stats.n}};
}

nlohmann::json ToJson(const OodComparison& comparison,
                      const std::string& in_tag, const std::string& ood_tag) {
  nlohmann::json doc;
  nlohmann::json delta;
  for (Measure m : kMeasures) {
    const auto i = static_cast<std::size_t>(m);
    const std::string name(MeasureName(m));
    doc[name][in_tag] = ToJson(comparison.in_dist[i]);
    doc[name][ood_tag] = ToJson(comparison.ood[i]);
    delta[name] = comparison.mean_delta[i];
  }
  doc["mean_delta"] = delta;
  return doc;
}

nlohmann::json SummarizeTriple(const UncertaintyTriple& triple) {
  nlohmann::json doc;
  doc["items"] = triple.size();
  for (Measure m : kMeasures) {
    doc[std::string(MeasureName(m))] = ToJson(ComputeBoxStats(Select(triple, m)));
  }
  return doc;
}

std::string RetentionCsv(std::span<const RetentionCurve> curves) {
  std::string out = "measure,fraction,metric_mean,ci_half_width,replications\n";
  for (const auto& curve : curves) {
    for (std::size_t k = 0; k < curve.fractions.size(); ++k) {
      out += MeasureName(curve.measure);
      out += ',' + FormatDouble(curve.fractions[k]);
      out += ',' + FormatDouble(curve.metric_mean[k]);
      out += ',' + FormatDouble(curve.ci_half_width[k]);
      out += ',' + std::to_string(curve.replications) + '\n';
    }
  }
  return out;
}

TensorFile TripleToTensor(const UncertaintyTriple& triple) {
  std::vector<double> data(triple.size() * 3);
  for (std::size_t n = 0; n < triple.size(); ++n) {
    data[3 * n] = triple.total[n];
    data[3 * n + 1] = triple.aleatoric[n];
    data[3 * n + 2] = triple.epistemic[n];
  }
  return MakeF64({triple.size(), 3}, std::move(data));
}

TrainConfig TrainConfigFromJson(const nlohmann::json& doc) {
  static const std::set<std::string> kFields = {
      "learning_rate", "epochs",      "batch_size", "mc_train_samples",
      "kl_scale",      "mixup_alpha", "seed",       "dropout_rate"};
  if (!doc.is_object()) {
    throw Error(ErrorCode::kConfigError, "train config must be an object");
  }
  for (const auto& [key, value] : doc.items()) {
    if (!kFields.count(key)) {
      throw Error(ErrorCode::kConfigError,
                  "unknown train config field '" + key + "'");
    }
  }
  for (const char* key : {"epochs", "batch_size", "mc_train_samples", "seed"}) {
    if (doc.contains(key) && !doc[key].is_number_unsigned()) {
      throw Error(ErrorCode::kConfigError,
                  std::string(key) + " must be a non-negative integer");
    }
  }
  TrainConfig cfg;
  try {
    cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
    cfg.epochs = doc.value("epochs", cfg.epochs);
    cfg.batch_size = doc.value("batch_size", cfg.batch_size);
    cfg.mc_train_samples = doc.value("mc_train_samples", cfg.mc_train_samples);
    if (doc.contains("kl_scale") && !doc["kl_scale"].is_null()) {
      cfg.kl_scale = doc["kl_scale"].get<double>();
    }
    cfg.mixup_alpha = doc.value("mixup_alpha", cfg.mixup_alpha);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.dropout_rate = doc.value("dropout_rate", cfg.dropout_rate);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                "bad train config: " + std::string(e.what()));
  }
  cfg.Validate();
  return cfg;
}

nlohmann::json ToJson(const TrainConfig& cfg) {
  nlohmann::json doc = {{"learning_rate", cfg.learning_rate},
                        {"epochs", cfg.epochs},
                        {"batch_size", cfg.batch_size},
                        {"mc_train_samples", cfg.mc_train_samples},
                        {"mixup_alpha", cfg.mixup_alpha},
                        {"seed", cfg.seed},
                        {"dropout_rate", cfg.dropout_rate}};
  if (cfg.kl_scale) {
    doc["kl_scale"] = *cfg.kl_scale;
  } else {
    doc["kl_scale"] = nullptr;
  }
  return doc;
}

}  // namespace uqkit
