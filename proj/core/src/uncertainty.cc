#include "uqkit/uncertainty.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "uqkit/error.h"

namespace uqkit {

double XLogX(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return p * std::log(std::clamp(p, kLogClamp, 1.0 - kLogClamp));
}

double BinaryEntropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kDomainError,
                "binary entropy needs p in [0,1], got " + std::to_string(p));
  }
  return -XLogX(p) - XLogX(1.0 - p);
}

double CategoricalEntropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) h -= XLogX(p);
  return h;
}

MeanProbabilities ComputeMeanProbabilities(const McPredictions& preds) {
  const std::size_t n_items = preds.items();
  const std::size_t n_classes = preds.classes();
  MeanProbabilities out;
  out.items = n_items;
  out.classes = n_classes;
  out.task = preds.task();
  out.probs.assign(n_items * n_classes, 0.0);
  for (std::size_t m = 0; m < preds.samples(); ++m) {
    const auto slice = preds.data().subspan(m * n_items * n_classes,
                                            n_items * n_classes);
    for (std::size_t i = 0; i < slice.size(); ++i) out.probs[i] += slice[i];
  }
  const double inv = 1.0 / static_cast<double>(preds.samples());
  for (double& p : out.probs) p *= inv;
  return out;
}

UncertaintyTriple DecomposeMulticlass(const McPredictions& preds) {
  if (preds.task() != Task::kMulticlass) {
    throw Error(ErrorCode::kTaskMismatch,
                "multiclass decomposition on multilabel predictions");
  }
  const auto mean = ComputeMeanProbabilities(preds);
  const std::size_t n_items = preds.items();
  const double inv_m = 1.0 / static_cast<double>(preds.samples());

  UncertaintyTriple out;
  out.total.resize(n_items);
  out.aleatoric.resize(n_items);
  out.epistemic.resize(n_items);
  for (std::size_t n = 0; n < n_items; ++n) {
    double expected = 0.0;
    for (std::size_t m = 0; m < preds.samples(); ++m) {
      expected += CategoricalEntropy(preds.row(m, n));
    }
    out.total[n] = CategoricalEntropy(mean.row(n));
    out.aleatoric[n] = expected * inv_m;
    out.epistemic[n] = out.total[n] - out.aleatoric[n];
  }
  return out;
}

PerClassUncertainty DecomposeMultilabelPerClass(const McPredictions& preds) {
  if (preds.task() != Task::kMultilabel) {
    throw Error(ErrorCode::kTaskMismatch,
                "multilabel decomposition on multiclass predictions");
  }
  const auto mean = ComputeMeanProbabilities(preds);
  const std::size_t n_items = preds.items();
  const std::size_t n_classes = preds.classes();
  const double inv_m = 1.0 / static_cast<double>(preds.samples());

  // Binary entropy without the domain check: inputs were range-validated
  // with a small slack, and XLogX maps the slack region to 0.
  auto h2 = [](double p) { return -XLogX(p) - XLogX(1.0 - p); };

  PerClassUncertainty out;
  out.items = n_items;
  out.classes = n_classes;
  out.total.resize(n_items * n_classes);
  out.aleatoric.resize(n_items * n_classes);
  out.epistemic.resize(n_items * n_classes);
  for (std::size_t n = 0; n < n_items; ++n) {
    for (std::size_t c = 0; c < n_classes; ++c) {
      double expected = 0.0;
      for (std::size_t m = 0; m < preds.samples(); ++m) {
        expected += h2(preds.at(m, n, c));
      }
      const std::size_t i = n * n_classes + c;
      out.total[i] = h2(mean.at(n, c));
      out.aleatoric[i] = expected * inv_m;
      out.epistemic[i] = out.total[i] - out.aleatoric[i];
    }
  }
  return out;
}

UncertaintyTriple DecomposeMultilabel(const McPredictions& preds) {
  const auto per_class = DecomposeMultilabelPerClass(preds);
  const std::size_t n_classes = per_class.classes;
  UncertaintyTriple out;
  out.total.assign(per_class.items, 0.0);
  out.aleatoric.assign(per_class.items, 0.0);
  for (std::size_t n = 0; n < per_class.items; ++n) {
    for (std::size_t c = 0; c < n_classes; ++c) {
      out.total[n] += per_class.total[n * n_classes + c];
      out.aleatoric[n] += per_class.aleatoric[n * n_classes + c];
    }
  }
  out.epistemic.resize(per_class.items);
  for (std::size_t n = 0; n < per_class.items; ++n) {
    out.epistemic[n] = out.total[n] - out.aleatoric[n];
  }
  return out;
}

UncertaintyTriple Decompose(const McPredictions& preds) {
  return preds.task() == Task::kMulticlass ? DecomposeMulticlass(preds)
                                           : DecomposeMultilabel(preds);
}

}  // namespace uqkit
