#include "uqkit/network.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "uqkit/error.h"

namespace uqkit {
namespace {

bool AllFinite(const Matrix& m) { return m.allFinite(); }

}  // namespace

void ToyNet::Validate() const {
  if (layers.empty()) {
    throw Error(ErrorCode::kDimMismatch, "network has no layers");
  }
  for (std::size_t i = 1; i < layers.size(); ++i) {
    if (layers[i].in_dim() != layers[i - 1].out_dim()) {
      throw Error(ErrorCode::kDimMismatch,
                  "layer " + std::to_string(i) + " expects " +
                      std::to_string(layers[i].in_dim()) +
                      " inputs but layer " + std::to_string(i - 1) +
                      " emits " + std::to_string(layers[i - 1].out_dim()));
    }
  }
  const std::size_t min_classes = task == Task::kMulticlass ? 2 : 1;
  if (num_classes() < min_classes) {
    throw Error(ErrorCode::kDimMismatch, "head emits too few classes");
  }
}

void ToyNet::SetBackboneFrozen(bool frozen) {
  for (std::size_t i = 0; i < backbone_size(); ++i) layers[i].frozen = frozen;
}

ToyNet BuildNet(LayerKind kind, std::size_t input_dim,
                std::span<const std::size_t> hidden, std::size_t classes,
                Task task, Rng& rng, Activation hidden_act,
                double dropout_rate) {
  ToyNet net;
  net.task = task;
  std::size_t in = input_dim;
  auto make = [&](std::size_t out, Activation act) {
    switch (kind) {
      case LayerKind::kDeterministic: return MakeDenseLayer(in, out, act, rng);
      case LayerKind::kFlipout: return MakeFlipoutLayer(in, out, act, rng);
      case LayerKind::kDropout:
        // Raw features are never dropped; every later weight layer is.
        return MakeDropoutLayer(in, out, act,
                                net.layers.empty() ? 0.0 : dropout_rate, rng);
    }
    return MakeDenseLayer(in, out, act, rng);
  };
  for (std::size_t width : hidden) {
    net.layers.push_back(make(width, hidden_act));
    in = width;
  }
  net.layers.push_back(make(classes, Activation::kIdentity));
  net.Validate();
  return net;
}

Matrix NetForward(const ToyNet& net, const Matrix& x, Rng& rng,
                  std::vector<LayerCache>* caches) {
  if (caches) caches->assign(net.layers.size(), LayerCache{});
  Matrix h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    h = LayerForward(net.layers[i], h, rng, caches ? &(*caches)[i] : nullptr);
  }
  return h;
}

Matrix OutputProbabilities(const Matrix& logits, Task task) {
  Matrix p(logits.rows(), logits.cols());
  if (task == Task::kMultilabel) {
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
      p.data()[i] = Sigmoid(logits.data()[i]);
    }
    return p;
  }
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double max = logits.row(r).maxCoeff();
    const auto e = (logits.row(r).array() - max).exp();
    p.row(r) = e / e.sum();
  }
  return p;
}

GradientSet ZeroGradients(const ToyNet& net) {
  GradientSet grads(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    for (const Matrix* param : net.layers[i].Parameters()) {
      grads[i].push_back(Matrix::Zero(param->rows(), param->cols()));
    }
  }
  return grads;
}

double NetKl(const ToyNet& net) {
  double kl = 0.0;
  for (const auto& layer : net.layers) {
    if (const auto* flip = std::get_if<VariationalDense>(&layer.impl)) {
      kl += KlGaussian(*flip);
    }
  }
  return kl;
}

LossResult ElboLoss(const ToyNet& net, const Matrix& x, const Matrix& targets,
                    double kl_scale, std::size_t mc_samples, Rng& rng) {
  if (x.rows() == 0) {
    throw Error(ErrorCode::kEmptyInput, "empty batch");
  }
  if (targets.rows() != x.rows() ||
      targets.cols() != static_cast<Eigen::Index>(net.num_classes())) {
    throw Error(ErrorCode::kShapeError, "targets do not match batch/head");
  }
  mc_samples = std::max<std::size_t>(mc_samples, 1);
  const double batch = static_cast<double>(x.rows());
  const double weight = 1.0 / (batch * static_cast<double>(mc_samples));

  LossResult result;
  result.grads = ZeroGradients(net);
  std::vector<LayerCache> caches;
  for (std::size_t k = 0; k < mc_samples; ++k) {
    const Matrix logits = NetForward(net, x, rng, &caches);
    Matrix grad_logits(logits.rows(), logits.cols());
    double nll = 0.0;
    if (net.task == Task::kMulticlass) {
      for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double max = logits.row(r).maxCoeff();
        const double lse =
            max + std::log((logits.row(r).array() - max).exp().sum());
        const double mass = targets.row(r).sum();
        for (Eigen::Index c = 0; c < logits.cols(); ++c) {
          const double log_p = logits(r, c) - lse;
          nll -= targets(r, c) * log_p;
          grad_logits(r, c) = (std::exp(log_p) * mass - targets(r, c)) * weight;
        }
      }
    } else {
      for (Eigen::Index i = 0; i < logits.size(); ++i) {
        const double z = logits.data()[i];
        const double y = targets.data()[i];
        nll += Softplus(z) - y * z;
        grad_logits.data()[i] = (Sigmoid(z) - y) * weight;
      }
    }
    result.nll += nll * weight;

    Matrix g = grad_logits;
    for (std::size_t i = net.layers.size(); i-- > 0;) {
      g = LayerBackward(net.layers[i], caches[i], g, result.grads[i]);
    }
  }

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (const auto* flip = std::get_if<VariationalDense>(&net.layers[i].impl)) {
      result.kl += KlGaussian(*flip);
      AccumulateKlGradient(*flip, kl_scale, result.grads[i]);
    }
  }
  result.loss = result.nll + kl_scale * result.kl;

  if (!std::isfinite(result.loss)) {
    throw Error(ErrorCode::kNonFinite, "loss is not finite");
  }
  for (const auto& layer_grads : result.grads) {
    for (const auto& g : layer_grads) {
      if (!AllFinite(g)) {
        throw Error(ErrorCode::kNonFinite, "gradient is not finite");
      }
    }
  }
  return result;
}

std::vector<VariationalDense> MopedInit(std::span<const DenseWeights> weights,
                                        double delta, double prior_sigma) {
  if (!(delta > 0.0)) {
    throw Error(ErrorCode::kConfigError, "MOPED delta must be positive");
  }
  if (!(prior_sigma > 0.0)) {
    throw Error(ErrorCode::kConfigError, "prior sigma must be positive");
  }
  auto rho_for = [delta](const Matrix& w) -> Matrix {
    return w.unaryExpr([delta](double v) {
      return InverseSoftplus(std::max(delta * std::abs(v), kMinSigma));
    });
  };
  std::vector<VariationalDense> out;
  out.reserve(weights.size());
  for (const auto& layer : weights) {
    VariationalDense v;
    v.mu = layer.w;
    v.rho = rho_for(layer.w);
    v.bias_mu = layer.b;
    v.bias_rho = rho_for(layer.b);
    v.prior_mu = layer.w;
    v.prior_bias_mu = layer.b;
    v.prior_sigma = prior_sigma;
    out.push_back(std::move(v));
  }
  return out;
}

ToyNet MopedConvert(const ToyNet& net, double delta, double prior_sigma) {
  ToyNet out;
  out.task = net.task;
  for (const auto& layer : net.layers) {
    const auto* dense = std::get_if<DenseLayer>(&layer.impl);
    if (!dense) {
      throw Error(ErrorCode::kStrategyMismatch,
                  "MOPED conversion needs deterministic layers, found " +
                      std::string(LayerKindName(layer.kind())));
    }
    const DenseWeights w{dense->w, dense->b};
    auto converted = MopedInit(std::span(&w, 1), delta, prior_sigma);
    out.layers.push_back(
        Layer{std::move(converted.front()), layer.activation, layer.frozen});
  }
  return out;
}

McPredictions McPredict(const ToyNet& net, const Matrix& inputs,
                        std::size_t m, const Rng& rng) {
  if (m < 1) throw Error(ErrorCode::kConfigError, "need at least one pass");
  const auto n_items = static_cast<std::size_t>(inputs.rows());
  const std::size_t n_classes = net.num_classes();
  std::vector<double> probs;
  probs.reserve(m * n_items * n_classes);
  for (std::size_t pass = 0; pass < m; ++pass) {
    Rng pass_rng = rng.Derive(pass);
    const Matrix p =
        OutputProbabilities(NetForward(net, inputs, pass_rng), net.task);
    probs.insert(probs.end(), p.data(), p.data() + p.size());
  }
  return McPredictions(std::move(probs), m, n_items, n_classes, net.task);
}

}  // namespace uqkit
