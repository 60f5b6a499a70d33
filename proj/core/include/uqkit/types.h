#ifndef UQKIT_TYPES_H_
#define UQKIT_TYPES_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace uqkit {

enum class Task { kMulticlass, kMultilabel };

std::string_view TaskName(Task task);
// Accepts "multiclass" / "multilabel"; throws kConfigError otherwise.
Task ParseTask(std::string_view name);

inline constexpr double kRangeSlack = 1e-6;
inline constexpr double kRowSumTolerance = 1e-6;

// M stochastic forward passes x N items x C classes, row-major, f64.
// Validated on construction and immutable afterwards.
class McPredictions {
 public:
  McPredictions(std::vector<double> probs, std::size_t samples,
                std::size_t items, std::size_t classes, Task task);

  std::size_t samples() const { return samples_; }
  std::size_t items() const { return items_; }
  std::size_t classes() const { return classes_; }
  Task task() const { return task_; }

  double at(std::size_t m, std::size_t n, std::size_t c) const {
    return probs_[(m * items_ + n) * classes_ + c];
  }
  // Class row for sample m, item n.
  std::span<const double> row(std::size_t m, std::size_t n) const {
    return {probs_.data() + (m * items_ + n) * classes_, classes_};
  }
  std::span<const double> data() const { return probs_; }

  // Same items and task, samples taken from `sample_ids` (repeats allowed).
  McPredictions SelectSamples(std::span<const std::size_t> sample_ids) const;
  // Same samples and task, items taken from `item_ids`.
  McPredictions SelectItems(std::span<const std::size_t> item_ids) const;

 private:
  std::vector<double> probs_;
  std::size_t samples_;
  std::size_t items_;
  std::size_t classes_;
  Task task_;
};

// Ground truth. Multiclass stores one index per item; multilabel stores an
// N x C row-major 0/1 matrix.
class LabelSet {
 public:
  static LabelSet Multiclass(std::vector<std::int64_t> indices,
                             std::size_t classes);
  static LabelSet Multilabel(std::vector<std::uint8_t> matrix,
                             std::size_t items, std::size_t classes);

  Task task() const { return task_; }
  std::size_t items() const { return items_; }
  std::size_t classes() const { return classes_; }

  bool positive(std::size_t n, std::size_t c) const;
  // Multiclass only.
  std::int64_t index(std::size_t n) const { return indices_[n]; }

  LabelSet SelectItems(std::span<const std::size_t> item_ids) const;

 private:
  LabelSet() = default;

  Task task_ = Task::kMulticlass;
  std::size_t items_ = 0;
  std::size_t classes_ = 0;
  std::vector<std::int64_t> indices_;
  std::vector<std::uint8_t> matrix_;
};

// Sample-mean probabilities, N x C row-major.
struct MeanProbabilities {
  std::vector<double> probs;
  std::size_t items = 0;
  std::size_t classes = 0;
  Task task = Task::kMulticlass;

  double at(std::size_t n, std::size_t c) const {
    return probs[n * classes + c];
  }
  std::span<const double> row(std::size_t n) const {
    return {probs.data() + n * classes, classes};
  }
};

// Per-item uncertainties in nats.
struct UncertaintyTriple {
  std::vector<double> total;
  std::vector<double> aleatoric;
  std::vector<double> epistemic;

  std::size_t size() const { return total.size(); }
};

enum class Measure { kEntropy, kAleatoric, kEpistemic };

std::string_view MeasureName(Measure measure);
Measure ParseMeasure(std::string_view name);
std::span<const double> Select(const UncertaintyTriple& triple,
                               Measure measure);

}  // namespace uqkit

#endif  // UQKIT_TYPES_H_
