#include "uqkit/types.h"

#include <cmath>
#include <string>

#include "uqkit/error.h"

namespace uqkit {

std::string_view TaskName(Task task) {
  return task == Task::kMulticlass ? "multiclass" : "multilabel";
}

Task ParseTask(std::string_view name) {
  if (name == "multiclass") return Task::kMulticlass;
  if (name == "multilabel") return Task::kMultilabel;
  throw Error(ErrorCode::kConfigError,
              "unknown task '" + std::string(name) + "'");
}

McPredictions::McPredictions(std::vector<double> probs, std::size_t samples,
                             std::size_t items, std::size_t classes, Task task)
    : probs_(std::move(probs)),
      samples_(samples),
      items_(items),
      classes_(classes),
      task_(task) {
  if (samples_ < 1) {
    throw Error(ErrorCode::kShapeError, "need at least one MC sample");
  }
  const std::size_t min_classes = task_ == Task::kMulticlass ? 2 : 1;
  if (classes_ < min_classes) {
    throw Error(ErrorCode::kShapeError,
                "need at least " + std::to_string(min_classes) + " classes");
  }
  if (probs_.size() != samples_ * items_ * classes_) {
    throw Error(ErrorCode::kShapeError,
                "buffer holds " + std::to_string(probs_.size()) +
                    " values, shape needs " +
                    std::to_string(samples_ * items_ * classes_));
  }
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!std::isfinite(p) || p < -kRangeSlack || p > 1.0 + kRangeSlack) {
      throw Error(ErrorCode::kRangeError,
                  "element " + std::to_string(i) + " = " + std::to_string(p) +
                      " outside [0,1]");
    }
  }
  if (task_ == Task::kMulticlass) {
    for (std::size_t m = 0; m < samples_; ++m) {
      for (std::size_t n = 0; n < items_; ++n) {
        double sum = 0.0;
        for (double p : row(m, n)) sum += p;
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
          throw Error(ErrorCode::kRowSumError,
                      "row [" + std::to_string(m) + "," + std::to_string(n) +
                          "] sums to " + std::to_string(sum));
        }
      }
    }
  }
}

McPredictions McPredictions::SelectSamples(
    std::span<const std::size_t> sample_ids) const {
  std::vector<double> out;
  out.reserve(sample_ids.size() * items_ * classes_);
  for (std::size_t m : sample_ids) {
    const auto* begin = probs_.data() + m * items_ * classes_;
    out.insert(out.end(), begin, begin + items_ * classes_);
  }
  return McPredictions(std::move(out), sample_ids.size(), items_, classes_,
                       task_);
}

McPredictions McPredictions::SelectItems(
    std::span<const std::size_t> item_ids) const {
  std::vector<double> out;
  out.reserve(samples_ * item_ids.size() * classes_);
  for (std::size_t m = 0; m < samples_; ++m) {
    for (std::size_t n : item_ids) {
      auto r = row(m, n);
      out.insert(out.end(), r.begin(), r.end());
    }
  }
  return McPredictions(std::move(out), samples_, item_ids.size(), classes_,
                       task_);
}

LabelSet LabelSet::Multiclass(std::vector<std::int64_t> indices,
                              std::size_t classes) {
  for (std::size_t n = 0; n < indices.size(); ++n) {
    if (indices[n] < 0 || static_cast<std::size_t>(indices[n]) >= classes) {
      throw Error(ErrorCode::kIndexError,
                  "label " + std::to_string(indices[n]) + " at item " +
                      std::to_string(n) + " outside [0," +
                      std::to_string(classes) + ")");
    }
  }
  LabelSet out;
  out.task_ = Task::kMulticlass;
  out.items_ = indices.size();
  out.classes_ = classes;
  out.indices_ = std::move(indices);
  return out;
}

LabelSet LabelSet::Multilabel(std::vector<std::uint8_t> matrix,
                              std::size_t items, std::size_t classes) {
  if (matrix.size() != items * classes) {
    throw Error(ErrorCode::kShapeError, "label matrix size mismatch");
  }
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    if (matrix[i] > 1) {
      throw Error(ErrorCode::kBinaryError,
                  "multilabel entry " + std::to_string(i) + " is not 0/1");
    }
  }
  LabelSet out;
  out.task_ = Task::kMultilabel;
  out.items_ = items;
  out.classes_ = classes;
  out.matrix_ = std::move(matrix);
  return out;
}

bool LabelSet::positive(std::size_t n, std::size_t c) const {
  if (task_ == Task::kMulticlass) {
    return indices_[n] == static_cast<std::int64_t>(c);
  }
  return matrix_[n * classes_ + c] != 0;
}

LabelSet LabelSet::SelectItems(std::span<const std::size_t> item_ids) const {
  LabelSet out;
  out.task_ = task_;
  out.items_ = item_ids.size();
  out.classes_ = classes_;
  if (task_ == Task::kMulticlass) {
    out.indices_.reserve(item_ids.size());
    for (std::size_t n : item_ids) out.indices_.push_back(indices_[n]);
  } else {
    out.matrix_.reserve(item_ids.size() * classes_);
    for (std::size_t n : item_ids) {
      const auto* begin = matrix_.data() + n * classes_;
      out.matrix_.insert(out.matrix_.end(), begin, begin + classes_);
    }
  }
  return out;
}

std::string_view MeasureName(Measure measure) {
  switch (measure) {
    case Measure::kEntropy: return "entropy";
    case Measure::kAleatoric: return "aleatoric";
    case Measure::kEpistemic: return "epistemic";
  }
  return "unknown";
}

Measure ParseMeasure(std::string_view name) {
  if (name == "entropy") return Measure::kEntropy;
  if (name == "aleatoric") return Measure::kAleatoric;
  if (name == "epistemic") return Measure::kEpistemic;
  throw Error(ErrorCode::kConfigError,
              "unknown measure '" + std::string(name) + "'");
}

std::span<const double> Select(const UncertaintyTriple& triple,
                               Measure measure) {
  switch (measure) {
    case Measure::kEntropy: return triple.total;
    case Measure::kAleatoric: return triple.aleatoric;
    case Measure::kEpistemic: return triple.epistemic;
  }
  return triple.total;
}

}  // namespace uqkit
