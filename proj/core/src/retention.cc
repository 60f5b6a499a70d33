#include "uqkit/retention.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "uqkit/error.h"
#include "uqkit/metrics.h"
#include "uqkit/rng.h"
#include "uqkit/uncertainty.h"

namespace uqkit {

std::vector<double> DefaultFractions() {
  std::vector<double> out(20);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = static_cast<double>(k + 1) / 20.0;
  }
  return out;
}

std::vector<std::size_t> RetentionOrder(std::span<const double> uncertainty) {
  std::vector<std::size_t> order(uncertainty.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return uncertainty[a] < uncertainty[b];
  });
  return order;
}

std::size_t RetainedCount(double fraction, std::size_t n) {
  const double exact = fraction * static_cast<double>(n);
  const double rounded = std::round(exact);
  // 0.15 * 20 evaluates to 3.0000000000000004; treat it as 3.
  if (std::abs(exact - rounded) <= 1e-9 * std::max(1.0, exact)) {
    return static_cast<std::size_t>(rounded);
  }
  return static_cast<std::size_t>(std::ceil(exact));
}

double ConfidenceHalfWidth(std::span<const double> values) {
  const std::size_t r = values.size();
  if (r < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(r);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(r - 1));
  return kCiZ * sd / std::sqrt(static_cast<double>(r));
}

RetentionCurve ComputeRetentionCurve(const McPredictions& preds,
                                     const LabelSet& labels, Measure measure,
                                     std::span<const double> fractions,
                                     std::size_t replications,
                                     std::uint64_t seed) {
  if (replications < 1) {
    throw Error(ErrorCode::kConfigError, "replications must be >= 1");
  }
  if (preds.task() != labels.task()) {
    throw Error(ErrorCode::kTaskMismatch, "predictions and labels disagree");
  }
  if (preds.items() != labels.items() || preds.classes() != labels.classes()) {
    throw Error(ErrorCode::kShapeError, "predictions and labels differ in shape");
  }
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    if (!(fractions[k] > 0.0 && fractions[k] <= 1.0)) {
      throw Error(ErrorCode::kConfigError, "fractions must lie in (0,1]");
    }
    if (k > 0 && fractions[k] <= fractions[k - 1]) {
      throw Error(ErrorCode::kConfigError, "fractions must be strictly ascending");
    }
    if (RetainedCount(fractions[k], preds.items()) == 0) {
      throw Error(ErrorCode::kEmptyRetained,
                  "fraction " + std::to_string(fractions[k]) +
                      " retains no items");
    }
  }

  const std::size_t n_samples = preds.samples();
  // values[k][r]: metric at fraction k in replication r.
  std::vector<std::vector<double>> values(fractions.size(),
                                          std::vector<double>(replications));
  std::vector<std::size_t> sample_ids(n_samples);
  for (std::size_t r = 0; r < replications; ++r) {
    Rng rng(seed + r);
    for (auto& id : sample_ids) id = rng.UniformIndex(n_samples);
    const auto resampled = preds.SelectSamples(sample_ids);
    const auto triple = Decompose(resampled);
    const auto order = RetentionOrder(Select(triple, measure));
    const auto mean = ComputeMeanProbabilities(resampled);

    if (preds.task() == Task::kMulticlass) {
      std::vector<std::size_t> correct_prefix(order.size() + 1, 0);
      for (std::size_t i = 0; i < order.size(); ++i) {
        const auto row = mean.row(order[i]);
        const auto best = std::max_element(row.begin(), row.end()) - row.begin();
        correct_prefix[i + 1] =
            correct_prefix[i] + (best == labels.index(order[i]) ? 1 : 0);
      }
      for (std::size_t k = 0; k < fractions.size(); ++k) {
        const std::size_t keep = RetainedCount(fractions[k], order.size());
        values[k][r] = static_cast<double>(correct_prefix[keep]) /
                       static_cast<double>(keep);
      }
    } else {
      for (std::size_t k = 0; k < fractions.size(); ++k) {
        const std::size_t keep = RetainedCount(fractions[k], order.size());
        const std::span<const std::size_t> kept(order.data(), keep);
        MeanProbabilities sub;
        sub.items = keep;
        sub.classes = mean.classes;
        sub.task = mean.task;
        sub.probs.reserve(keep * mean.classes);
        for (std::size_t n : kept) {
          const auto row = mean.row(n);
          sub.probs.insert(sub.probs.end(), row.begin(), row.end());
        }
        values[k][r] = MacroAveragePrecision(sub, labels.SelectItems(kept));
      }
    }
  }

  RetentionCurve curve;
  curve.measure = measure;
  curve.fractions.assign(fractions.begin(), fractions.end());
  curve.replications = replications;
  for (const auto& per_rep : values) {
    double sum = 0.0;
    for (double v : per_rep) sum += v;
    curve.metric_mean.push_back(sum / static_cast<double>(replications));
    curve.ci_half_width.push_back(ConfidenceHalfWidth(per_rep));
  }
  return curve;
}

RetentionCurve AverageFoldCurves(std::span<const RetentionCurve> folds) {
  if (folds.empty()) throw Error(ErrorCode::kEmptyInput, "no fold curves");
  RetentionCurve out = folds.front();
  for (const auto& fold : folds.subspan(1)) {
    if (fold.measure != out.measure || fold.fractions != out.fractions) {
      throw Error(ErrorCode::kShapeError,
                  "fold curves must share measure and fractions");
    }
    for (std::size_t k = 0; k < out.fractions.size(); ++k) {
      out.metric_mean[k] += fold.metric_mean[k];
      out.ci_half_width[k] += fold.ci_half_width[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(folds.size());
  for (std::size_t k = 0; k < out.fractions.size(); ++k) {
    out.metric_mean[k] *= inv;
    out.ci_half_width[k] *= inv;
  }
  return out;
}

double SortedQuantile(std::span<const double> sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats ComputeBoxStats(std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kEmptyInput, "box statistics of an empty sample");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  BoxStats s;
  s.n = sorted.size();
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
           static_cast<double>(s.n);
  s.q1 = SortedQuantile(sorted, 0.25);
  s.median = SortedQuantile(sorted, 0.5);
  s.q3 = SortedQuantile(sorted, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_lo = *std::lower_bound(sorted.begin(), sorted.end(), lo_fence);
  s.whisker_hi = *(std::upper_bound(sorted.begin(), sorted.end(), hi_fence) - 1);
  // Whiskers never cut into the box.
  s.whisker_lo = std::min(s.whisker_lo, s.q1);
  s.whisker_hi = std::max(s.whisker_hi, s.q3);
  return s;
}

OodComparison CompareOod(const UncertaintyTriple& in_dist,
                         const UncertaintyTriple& ood) {
  if (in_dist.size() == 0 || ood.size() == 0) {
    throw Error(ErrorCode::kEmptyInput, "OOD comparison needs both sets");
  }
  OodComparison out;
  for (Measure m : {Measure::kEntropy, Measure::kAleatoric, Measure::kEpistemic}) {
    const auto i = static_cast<std::size_t>(m);
    out.in_dist[i] = ComputeBoxStats(Select(in_dist, m));
    out.ood[i] = ComputeBoxStats(Select(ood, m));
    out.mean_delta[i] = out.ood[i].mean - out.in_dist[i].mean;
  }
  return out;
}

}  // namespace uqkit
