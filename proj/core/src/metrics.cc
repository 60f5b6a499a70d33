#include "uqkit/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "uqkit/error.h"
#include "uqkit/uncertainty.h"

namespace uqkit {
namespace {

void CheckPaired(std::span<const double> scores,
                 std::span<const std::uint8_t> positives) {
  if (scores.size() != positives.size()) {
    throw Error(ErrorCode::kShapeError, "scores and labels differ in length");
  }
}

void CheckShapes(const MeanProbabilities& mean, const LabelSet& labels) {
  if (mean.items != labels.items() || mean.classes != labels.classes()) {
    throw Error(ErrorCode::kShapeError,
                "predictions are " + std::to_string(mean.items) + "x" +
                    std::to_string(mean.classes) + ", labels are " +
                    std::to_string(labels.items()) + "x" +
                    std::to_string(labels.classes()));
  }
}

std::vector<double> ClassScores(const MeanProbabilities& mean, std::size_t c) {
  std::vector<double> out(mean.items);
  for (std::size_t n = 0; n < mean.items; ++n) out[n] = mean.at(n, c);
  return out;
}

std::vector<std::uint8_t> ClassPositives(const LabelSet& labels,
                                         std::size_t c) {
  std::vector<std::uint8_t> out(labels.items());
  for (std::size_t n = 0; n < labels.items(); ++n) {
    out[n] = labels.positive(n, c) ? 1 : 0;
  }
  return out;
}

}  // namespace

double Accuracy(const MeanProbabilities& mean, const LabelSet& labels) {
  if (labels.task() != Task::kMulticlass) {
    throw Error(ErrorCode::kTaskMismatch, "accuracy needs multiclass labels");
  }
  CheckShapes(mean, labels);
  if (mean.items == 0) {
    throw Error(ErrorCode::kEmptyInput, "accuracy of zero items");
  }
  std::size_t correct = 0;
  for (std::size_t n = 0; n < mean.items; ++n) {
    const auto row = mean.row(n);
    // max_element returns the first maximum, i.e. the lowest index.
    const auto best = std::max_element(row.begin(), row.end()) - row.begin();
    if (best == labels.index(n)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(mean.items);
}

double AveragePrecision(std::span<const double> scores,
                        std::span<const std::uint8_t> positives) {
  CheckPaired(scores, positives);
  const std::size_t total_pos =
      static_cast<std::size_t>(std::count_if(positives.begin(), positives.end(),
                                             [](auto v) { return v != 0; }));
  if (total_pos == 0) {
    throw Error(ErrorCode::kNoPositives, "average precision needs a positive");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t seen = 0, hits = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      hits += positives[order[j]] != 0;
      ++j;
    }
    seen = j;
    const double recall =
        static_cast<double>(hits) / static_cast<double>(total_pos);
    const double precision =
        static_cast<double>(hits) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double Auc(std::span<const double> scores,
           std::span<const std::uint8_t> positives) {
  CheckPaired(scores, positives);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank-sum form of Mann-Whitney; midranks give the 0.5 tie credit.
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (positives[order[k]] != 0) {
        pos_rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::kDegenerateClass,
                "AUC needs both positive and negative items");
  }
  const double p = static_cast<double>(n_pos);
  const double u = pos_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(n_neg));
}

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double NormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::kDomainError,
                "quantile needs p in [0,1], got " + std::to_string(p));
  }
  // Acklam's rational approximation (relative error ~1.2e-9).
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double kLow = 0.02425;
  double x;
  if (p < kLow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - kLow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step on Phi(x) - p.
  const double e = NormalCdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double DPrime(double auc) {
  if (!(auc > 0.0 && auc < 1.0)) {
    throw Error(ErrorCode::kDomainError,
                "d-prime is infinite or undefined for AUC " +
                    std::to_string(auc));
  }
  return std::sqrt(2.0) * NormalQuantile(auc);
}

double MacroAveragePrecision(const MeanProbabilities& mean,
                             const LabelSet& labels) {
  CheckShapes(mean, labels);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < mean.classes; ++c) {
    const auto pos = ClassPositives(labels, c);
    if (std::find(pos.begin(), pos.end(), 1) == pos.end()) continue;
    sum += AveragePrecision(ClassScores(mean, c), pos);
    ++used;
  }
  if (used == 0) {
    throw Error(ErrorCode::kAllClassesSkipped, "no class has a positive item");
  }
  return sum / static_cast<double>(used);
}

MetricReport MacroMetrics(const McPredictions& preds, const LabelSet& labels) {
  if (preds.task() != labels.task()) {
    throw Error(ErrorCode::kTaskMismatch, "predictions and labels disagree");
  }
  const auto mean = ComputeMeanProbabilities(preds);
  CheckShapes(mean, labels);

  MetricReport report;
  report.per_class_ap.resize(mean.classes);
  report.per_class_auc.resize(mean.classes);
  double ap_sum = 0.0, auc_sum = 0.0;
  std::size_t ap_used = 0, auc_used = 0;
  for (std::size_t c = 0; c < mean.classes; ++c) {
    const auto scores = ClassScores(mean, c);
    const auto pos = ClassPositives(labels, c);
    const auto n_pos =
        static_cast<std::size_t>(std::count(pos.begin(), pos.end(), 1));
    if (n_pos > 0) {
      report.per_class_ap[c] = AveragePrecision(scores, pos);
      ap_sum += *report.per_class_ap[c];
      ++ap_used;
    }
    if (n_pos > 0 && n_pos < pos.size()) {
      report.per_class_auc[c] = Auc(scores, pos);
      auc_sum += *report.per_class_auc[c];
      ++auc_used;
    }
    if (!report.per_class_ap[c] || !report.per_class_auc[c]) {
      report.skipped_classes.push_back(c);
    }
  }
  if (ap_used == 0 || auc_used == 0) {
    throw Error(ErrorCode::kAllClassesSkipped,
                "no class has both positive and negative items");
  }
  report.map_macro = ap_sum / static_cast<double>(ap_used);
  report.auc_macro = auc_sum / static_cast<double>(auc_used);
  if (report.auc_macro >= 1.0 || report.auc_macro <= 0.0) {
    report.d_prime_saturated = true;
    report.d_prime = report.auc_macro >= 1.0
                         ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
  } else {
    report.d_prime = DPrime(report.auc_macro);
  }
  if (labels.task() == Task::kMulticlass) {
    report.accuracy = Accuracy(mean, labels);
  }
  return report;
}

}  // namespace uqkit
