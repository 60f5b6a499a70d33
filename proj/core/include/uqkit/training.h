#ifndef UQKIT_TRAINING_H_
#define UQKIT_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "uqkit/network.h"
#include "uqkit/types.h"

namespace uqkit {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::size_t mc_train_samples = 1;
  // Defaults to 1 / (number of training items) when unset.
  std::optional<double> kl_scale;
  double mixup_alpha = 0.0;
  std::uint64_t seed = 0;
  double dropout_rate = 0.5;

  // Throws kConfigError on out-of-range values.
  void Validate() const;
};

// Inputs plus soft/multi-hot targets.
struct Dataset {
  Matrix x;        // N x D
  Matrix targets;  // N x C
  Task task = Task::kMulticlass;

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t classes() const { return static_cast<std::size_t>(targets.cols()); }
  // Hard labels (argmax for multiclass, > 0.5 for multilabel).
  LabelSet Labels() const;
};

Matrix OneHot(std::span<const std::int64_t> labels, std::size_t classes);

struct MixedPair {
  Matrix x;
  Matrix y;
  double lambda = 1.0;
};

// (lambda x1 + (1-lambda) x2, lambda y1 + (1-lambda) y2).
MixedPair MixupWithLambda(const Matrix& x1, const Matrix& y1, const Matrix& x2,
                          const Matrix& y2, double lambda);
// lambda ~ Beta(alpha, alpha); alpha == 0 pins lambda to 1.
MixedPair Mixup(const Matrix& x1, const Matrix& y1, const Matrix& x2,
                const Matrix& y2, double alpha, Rng& rng);

// Adam with beta1 0.9, beta2 0.999, eps 1e-8. Moments are allocated lazily
// on the first step; frozen layers are skipped entirely.
class Adam {
 public:
  explicit Adam(double learning_rate);

  void Step(ToyNet& net, const GradientSet& grads);

  double learning_rate() const { return learning_rate_; }
  std::size_t steps() const { return steps_; }

 private:
  double learning_rate_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double epsilon_ = 1e-8;
  std::size_t steps_ = 0;
  GradientSet first_moment_;
  GradientSet second_moment_;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean batch loss per epoch
  std::size_t steps = 0;
  double learning_rate = 0.0;
};

// Minibatch Adam on the negative ELBO. Shuffling, mixup and layer noise are
// drawn from streams derived from cfg.seed. Throws kNonFinite naming the
// epoch on divergence.
TrainResult Train(ToyNet& net, const Dataset& data, const TrainConfig& cfg);

// Fraction of items whose MC-averaged prediction matches the hard label
// (multiclass) or macro mAP (multilabel).
double EvaluateNet(const ToyNet& net, const Dataset& data, std::size_t passes,
                   std::uint64_t seed);

}  // namespace uqkit

#endif  // UQKIT_TRAINING_H_
