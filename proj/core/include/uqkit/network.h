#ifndef UQKIT_NETWORK_H_
#define UQKIT_NETWORK_H_

#include <cstddef>
#include <span>
#include <vector>

#include "uqkit/layers.h"
#include "uqkit/rng.h"
#include "uqkit/types.h"

namespace uqkit {

// A stack of dense layers; the last one is the classification head and
// emits logits (identity activation).
struct ToyNet {
  std::vector<Layer> layers;
  Task task = Task::kMulticlass;

  std::size_t input_dim() const { return layers.front().in_dim(); }
  std::size_t num_classes() const { return layers.back().out_dim(); }
  Layer& head() { return layers.back(); }
  const Layer& head() const { return layers.back(); }
  std::size_t backbone_size() const { return layers.size() - 1; }

  // Throws kDimMismatch when adjacent layers do not chain.
  void Validate() const;
  void SetBackboneFrozen(bool frozen);
};

// Hidden layers use `hidden_act`; the head is always identity. Dropout nets
// apply `dropout_rate` before every layer except the first.
ToyNet BuildNet(LayerKind kind, std::size_t input_dim,
                std::span<const std::size_t> hidden, std::size_t classes,
                Task task, Rng& rng, Activation hidden_act = Activation::kRelu,
                double dropout_rate = 0.5);

// Stochastic logits for a batch.
Matrix NetForward(const ToyNet& net, const Matrix& x, Rng& rng,
                  std::vector<LayerCache>* caches = nullptr);

// Softmax rows (multiclass) or elementwise sigmoid (multilabel).
Matrix OutputProbabilities(const Matrix& logits, Task task);

// Parameter gradients, indexed [layer][parameter] like Layer::Parameters().
using GradientSet = std::vector<std::vector<Matrix>>;

GradientSet ZeroGradients(const ToyNet& net);

struct LossResult {
  double loss = 0.0;
  double nll = 0.0;
  double kl = 0.0;
  GradientSet grads;
};

// Sum of KlGaussian over the net's Flipout layers.
double NetKl(const ToyNet& net);

// Negative ELBO on one batch: mean NLL over the batch (averaged over
// `mc_samples` forward passes) plus kl_scale * KL. Targets are probability
// rows (multiclass) or independent 0..1 targets (multilabel), so mixed-up
// labels are accepted. Noise is drawn from `rng` in a fixed order that does
// not depend on parameter values. Throws kNonFinite.
LossResult ElboLoss(const ToyNet& net, const Matrix& x, const Matrix& targets,
                    double kl_scale, std::size_t mc_samples, Rng& rng);

// Deterministic weights and bias of one layer.
struct DenseWeights {
  Matrix w;
  Matrix b;
};

// Posterior mean = prior mean = w; sigma = max(delta |w|, 1e-6). Biases get
// the same treatment.
std::vector<VariationalDense> MopedInit(std::span<const DenseWeights> weights,
                                        double delta, double prior_sigma = 1.0);
// Converts every deterministic layer of `net` to Flipout via MopedInit.
ToyNet MopedConvert(const ToyNet& net, double delta, double prior_sigma = 1.0);

// m stochastic passes -> [m, N, C] probabilities. Pass i draws its noise
// from rng.Derive(i), so passes are independent of evaluation order.
McPredictions McPredict(const ToyNet& net, const Matrix& inputs,
                        std::size_t m, const Rng& rng);

}  // namespace uqkit

#endif  // UQKIT_NETWORK_H_
