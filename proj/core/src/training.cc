#include "uqkit/training.h"

#include <cmath>
#include <numeric>
#include <string>

#include "uqkit/error.h"
#include "uqkit/metrics.h"
#include "uqkit/uncertainty.h"

namespace uqkit {
namespace {

Matrix GatherRows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace

void TrainConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kConfigError, what);
  };
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (batch_size < 1) fail("batch_size must be positive");
  if (mc_train_samples < 1) fail("mc_train_samples must be positive");
  if (kl_scale && !(*kl_scale >= 0.0)) fail("kl_scale must be non-negative");
  if (!(mixup_alpha >= 0.0)) fail("mixup_alpha must be non-negative");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    fail("dropout_rate must be in [0,1)");
  }
}

LabelSet Dataset::Labels() const {
  const std::size_t n = size();
  const std::size_t c = classes();
  if (task == Task::kMulticlass) {
    std::vector<std::int64_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      targets.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
      idx[i] = best;
    }
    return LabelSet::Multiclass(std::move(idx), c);
  }
  std::vector<std::uint8_t> matrix(n * c);
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    matrix[i] = targets.data()[i] > 0.5 ? 1 : 0;
  }
  return LabelSet::Multilabel(std::move(matrix), n, c);
}

Matrix OneHot(std::span<const std::int64_t> labels, std::size_t classes) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(labels.size()),
                            static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw Error(ErrorCode::kIndexError, "label outside class range");
    }
    out(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return out;
}

MixedPair MixupWithLambda(const Matrix& x1, const Matrix& y1, const Matrix& x2,
                          const Matrix& y2, double lambda) {
  if (x1.rows() != x2.rows() || x1.cols() != x2.cols() ||
      y1.rows() != y2.rows() || y1.cols() != y2.cols() ||
      x1.rows() != y1.rows()) {
    throw Error(ErrorCode::kShapeError, "mixup operands differ in shape");
  }
  if (lambda == 1.0) return {x1, y1, 1.0};
  return {lambda * x1 + (1.0 - lambda) * x2, lambda * y1 + (1.0 - lambda) * y2,
          lambda};
}

MixedPair Mixup(const Matrix& x1, const Matrix& y1, const Matrix& x2,
                const Matrix& y2, double alpha, Rng& rng) {
  if (!(alpha >= 0.0)) {
    throw Error(ErrorCode::kConfigError, "mixup alpha must be non-negative");
  }
  const double lambda = alpha == 0.0 ? 1.0 : rng.Beta(alpha, alpha);
  return MixupWithLambda(x1, y1, x2, y2, lambda);
}

Adam::Adam(double learning_rate) : learning_rate_(learning_rate) {}

void Adam::Step(ToyNet& net, const GradientSet& grads) {
  if (first_moment_.empty()) {
    first_moment_ = ZeroGradients(net);
    second_moment_ = ZeroGradients(net);
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(beta1_, t);
  const double correction2 = 1.0 - std::pow(beta2_, t);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    Layer& layer = net.layers[i];
    if (layer.frozen) continue;
    auto params = layer.Parameters();
    for (std::size_t j = 0; j < params.size(); ++j) {
      Matrix& m = first_moment_[i][j];
      Matrix& v = second_moment_[i][j];
      const Matrix& g = grads[i][j];
      m = beta1_ * m + (1.0 - beta1_) * g;
      v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
      const auto m_hat = m.array() / correction1;
      const auto v_hat = v.array() / correction2;
      params[j]->array() -= learning_rate_ * m_hat / (v_hat.sqrt() + epsilon_);
    }
  }
}

TrainResult Train(ToyNet& net, const Dataset& data, const TrainConfig& cfg) {
  cfg.Validate();
  net.Validate();
  if (data.size() == 0) {
    throw Error(ErrorCode::kEmptyInput, "training set is empty");
  }
  if (static_cast<std::size_t>(data.x.cols()) != net.input_dim() ||
      data.classes() != net.num_classes()) {
    throw Error(ErrorCode::kDimMismatch,
                "dataset is " + std::to_string(data.x.cols()) + " -> " +
                    std::to_string(data.classes()) + ", network is " +
                    std::to_string(net.input_dim()) + " -> " +
                    std::to_string(net.num_classes()));
  }
  const double kl_scale =
      cfg.kl_scale.value_or(1.0 / static_cast<double>(data.size()));

  const Rng root(cfg.seed);
  Rng shuffle_rng = root.Derive(1);
  Rng noise_rng = root.Derive(2);
  Rng mixup_rng = root.Derive(3);

  Adam optimizer(cfg.learning_rate);
  TrainResult result;
  result.learning_rate = cfg.learning_rate;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.Shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, order.size());
      const std::span<const std::size_t> ids(order.data() + start, end - start);
      Matrix x = GatherRows(data.x, ids);
      Matrix y = GatherRows(data.targets, ids);
      if (cfg.mixup_alpha > 0.0) {
        std::vector<std::size_t> partner(ids.size());
        std::iota(partner.begin(), partner.end(), 0);
        mixup_rng.Shuffle(partner);
        auto mixed = Mixup(x, y, GatherRows(x, partner), GatherRows(y, partner),
                           cfg.mixup_alpha, mixup_rng);
        x = std::move(mixed.x);
        y = std::move(mixed.y);
      }
      LossResult step;
      try {
        step = ElboLoss(net, x, y, kl_scale, cfg.mc_train_samples, noise_rng);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonFinite) throw;
        throw Error(ErrorCode::kNonFinite,
                    "training diverged at epoch " + std::to_string(epoch));
      }
      optimizer.Step(net, step.grads);
      loss_sum += step.loss;
      ++batches;
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
  }
  result.steps = optimizer.steps();
  return result;
}

double EvaluateNet(const ToyNet& net, const Dataset& data, std::size_t passes,
                   std::uint64_t seed) {
  const auto preds = McPredict(net, data.x, passes, Rng(seed));
  const auto mean = ComputeMeanProbabilities(preds);
  if (data.task == Task::kMulticlass) return Accuracy(mean, data.Labels());
  return MacroAveragePrecision(mean, data.Labels());
}

}  // namespace uqkit
