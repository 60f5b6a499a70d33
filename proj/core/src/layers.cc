#include "uqkit/layers.h"

#include <cmath>
#include <string>

#include "uqkit/error.h"

namespace uqkit {
namespace {

Matrix UniformMatrix(std::size_t rows, std::size_t cols, double bound,
                     Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = bound * (2.0 * rng.Uniform() - 1.0);
  }
  return m;
}

Matrix NormalMatrix(std::size_t rows, std::size_t cols, double mean,
                    double sd, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = mean + sd * rng.Normal();
  }
  return m;
}

Matrix SoftplusOf(const Matrix& rho) {
  return rho.unaryExpr([](double r) { return Softplus(r); });
}

Matrix SigmoidOf(const Matrix& rho) {
  return rho.unaryExpr([](double r) { return Sigmoid(r); });
}

void CheckInput(const Matrix& x, Eigen::Index in) {
  if (x.cols() != in) {
    throw Error(ErrorCode::kShapeError,
                "layer expects " + std::to_string(in) + " inputs, got " +
                    std::to_string(x.cols()));
  }
}

double KlTerm(double mu, double sigma, double prior_mu, double prior_sigma) {
  const double d = mu - prior_mu;
  return std::log(prior_sigma / sigma) +
         (sigma * sigma + d * d) / (2.0 * prior_sigma * prior_sigma) - 0.5;
}

Matrix ApplyActivation(Activation act, const Matrix& z) {
  switch (act) {
    case Activation::kIdentity: return z;
    case Activation::kRelu: return z.cwiseMax(0.0);
    case Activation::kTanh: return z.array().tanh().matrix();
  }
  return z;
}

}  // namespace

double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double InverseSoftplus(double y) { return y + std::log(-std::expm1(-y)); }

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::string_view ActivationName(Activation activation) {
  switch (activation) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "identity";
}

Activation ParseActivation(std::string_view name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw Error(ErrorCode::kConfigError,
              "unknown activation '" + std::string(name) + "'");
}

std::string_view LayerKindName(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDeterministic: return "deterministic";
    case LayerKind::kFlipout: return "flipout";
    case LayerKind::kDropout: return "dropout";
  }
  return "deterministic";
}

LayerKind ParseLayerKind(std::string_view name) {
  if (name == "deterministic") return LayerKind::kDeterministic;
  if (name == "flipout") return LayerKind::kFlipout;
  if (name == "dropout") return LayerKind::kDropout;
  throw Error(ErrorCode::kConfigError,
              "unknown layer kind '" + std::string(name) + "'");
}

Matrix VariationalDense::Sigma() const { return SoftplusOf(rho); }
Matrix VariationalDense::BiasSigma() const { return SoftplusOf(bias_rho); }

std::size_t Layer::in_dim() const {
  return std::visit(
      [](const auto& l) -> std::size_t {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, VariationalDense>) {
          return static_cast<std::size_t>(l.mu.rows());
        } else {
          return static_cast<std::size_t>(l.w.rows());
        }
      },
      impl);
}

std::size_t Layer::out_dim() const {
  return std::visit(
      [](const auto& l) -> std::size_t {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, VariationalDense>) {
          return static_cast<std::size_t>(l.mu.cols());
        } else {
          return static_cast<std::size_t>(l.w.cols());
        }
      },
      impl);
}

std::vector<Matrix*> Layer::Parameters() {
  return std::visit(
      [](auto& l) -> std::vector<Matrix*> {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, VariationalDense>) {
          return {&l.mu, &l.rho, &l.bias_mu, &l.bias_rho};
        } else {
          return {&l.w, &l.b};
        }
      },
      impl);
}

std::vector<const Matrix*> Layer::Parameters() const {
  auto params = const_cast<Layer*>(this)->Parameters();
  return {params.begin(), params.end()};
}

std::vector<std::string> Layer::ParameterNames() const {
  if (kind() == LayerKind::kFlipout) {
    return {"mu", "rho", "bias_mu", "bias_rho"};
  }
  return {"w", "b"};
}

Layer MakeDenseLayer(std::size_t in, std::size_t out, Activation act,
                     Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  DenseLayer l{UniformMatrix(in, out, bound, rng),
               UniformMatrix(1, out, bound, rng)};
  return Layer{std::move(l), act, false};
}

Layer MakeFlipoutLayer(std::size_t in, std::size_t out, Activation act,
                       Rng& rng, double prior_sigma) {
  VariationalDense l;
  l.mu = NormalMatrix(in, out, 0.0, 0.1, rng);
  l.rho = NormalMatrix(in, out, -3.0, 0.1, rng);
  l.bias_mu = NormalMatrix(1, out, 0.0, 0.1, rng);
  l.bias_rho = NormalMatrix(1, out, -3.0, 0.1, rng);
  l.prior_mu = Matrix::Zero(in, out);
  l.prior_bias_mu = Matrix::Zero(1, out);
  l.prior_sigma = prior_sigma;
  return Layer{std::move(l), act, false};
}

Layer MakeDropoutLayer(std::size_t in, std::size_t out, Activation act,
                       double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::kConfigError, "dropout rate must be in [0,1)");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  DropoutDense l{UniformMatrix(in, out, bound, rng),
                 UniformMatrix(1, out, bound, rng), rate};
  return Layer{std::move(l), act, false};
}

FlipoutNoise SampleFlipoutNoise(const VariationalDense& layer,
                                std::size_t batch, Rng& rng) {
  const auto in = static_cast<std::size_t>(layer.mu.rows());
  const auto out = static_cast<std::size_t>(layer.mu.cols());
  FlipoutNoise noise;
  noise.weight_eps = NormalMatrix(in, out, 0.0, 1.0, rng);
  noise.sign_in.resize(batch, in);
  for (Eigen::Index i = 0; i < noise.sign_in.size(); ++i) {
    noise.sign_in.data()[i] = rng.Rademacher();
  }
  noise.sign_out.resize(batch, out);
  for (Eigen::Index i = 0; i < noise.sign_out.size(); ++i) {
    noise.sign_out.data()[i] = rng.Rademacher();
  }
  noise.bias_eps = NormalMatrix(batch, out, 0.0, 1.0, rng);
  return noise;
}

Matrix FlipoutForward(const VariationalDense& layer, const Matrix& x,
                      const FlipoutNoise& noise) {
  CheckInput(x, layer.mu.rows());
  const Matrix perturbation =
      (x.cwiseProduct(noise.sign_in) *
       layer.Sigma().cwiseProduct(noise.weight_eps))
          .cwiseProduct(noise.sign_out);
  Matrix y = x * layer.mu + perturbation;
  y.rowwise() += layer.bias_mu.row(0);
  const Matrix bias_sigma = layer.BiasSigma();
  for (Eigen::Index b = 0; b < y.rows(); ++b) {
    y.row(b) += bias_sigma.row(0).cwiseProduct(noise.bias_eps.row(b));
  }
  return y;
}

Matrix FlipoutForward(const VariationalDense& layer, const Matrix& x,
                      Rng& rng) {
  CheckInput(x, layer.mu.rows());
  return FlipoutForward(layer, x,
                        SampleFlipoutNoise(layer, x.rows(), rng));
}

Matrix SampleDropoutMask(std::size_t batch, std::size_t in, double rate,
                         Rng& rng) {
  Matrix mask(batch, in);
  const double keep = 1.0 - rate;
  const double scale = 1.0 / keep;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rate > 0.0 && !rng.Bernoulli(keep) ? 0.0 : scale;
  }
  return mask;
}

Matrix McDropoutForward(const DropoutDense& layer, const Matrix& x,
                        const Matrix& mask) {
  CheckInput(x, layer.w.rows());
  Matrix y = x.cwiseProduct(mask) * layer.w;
  y.rowwise() += layer.b.row(0);
  return y;
}

Matrix McDropoutForward(const DropoutDense& layer, const Matrix& x, Rng& rng) {
  CheckInput(x, layer.w.rows());
  return McDropoutForward(
      layer, x, SampleDropoutMask(x.rows(), x.cols(), layer.rate, rng));
}

double KlGaussian(const VariationalDense& layer) {
  const Matrix sigma = layer.Sigma();
  const Matrix bias_sigma = layer.BiasSigma();
  double kl = 0.0;
  for (Eigen::Index i = 0; i < layer.mu.size(); ++i) {
    kl += KlTerm(layer.mu.data()[i], sigma.data()[i], layer.prior_mu.data()[i],
                 layer.prior_sigma);
  }
  for (Eigen::Index i = 0; i < layer.bias_mu.size(); ++i) {
    kl += KlTerm(layer.bias_mu.data()[i], bias_sigma.data()[i],
                 layer.prior_bias_mu.data()[i], layer.prior_sigma);
  }
  return kl;
}

void AccumulateKlGradient(const VariationalDense& layer, double scale,
                          std::vector<Matrix>& grads) {
  const double inv_var = 1.0 / (layer.prior_sigma * layer.prior_sigma);
  auto accumulate = [&](const Matrix& mu, const Matrix& rho,
                        const Matrix& prior_mu, Matrix& grad_mu,
                        Matrix& grad_rho) {
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      const double sigma = Softplus(rho.data()[i]);
      grad_mu.data()[i] += scale * (mu.data()[i] - prior_mu.data()[i]) * inv_var;
      grad_rho.data()[i] +=
          scale * (-1.0 / sigma + sigma * inv_var) * Sigmoid(rho.data()[i]);
    }
  };
  accumulate(layer.mu, layer.rho, layer.prior_mu, grads[0], grads[1]);
  accumulate(layer.bias_mu, layer.bias_rho, layer.prior_bias_mu, grads[2],
             grads[3]);
}

Matrix LayerForward(const Layer& layer, const Matrix& x, Rng& rng,
                    LayerCache* cache) {
  CheckInput(x, static_cast<Eigen::Index>(layer.in_dim()));
  Matrix z;
  if (const auto* dense = std::get_if<DenseLayer>(&layer.impl)) {
    z = x * dense->w;
    z.rowwise() += dense->b.row(0);
  } else if (const auto* flip = std::get_if<VariationalDense>(&layer.impl)) {
    auto noise = SampleFlipoutNoise(*flip, x.rows(), rng);
    z = FlipoutForward(*flip, x, noise);
    if (cache) cache->flipout = std::move(noise);
  } else {
    const auto& drop = std::get<DropoutDense>(layer.impl);
    Matrix mask = SampleDropoutMask(x.rows(), x.cols(), drop.rate, rng);
    z = McDropoutForward(drop, x, mask);
    if (cache) cache->dropout_mask = std::move(mask);
  }
  Matrix y = ApplyActivation(layer.activation, z);
  if (cache) {
    cache->input = x;
    cache->pre_activation = std::move(z);
    cache->output = y;
  }
  return y;
}

Matrix LayerBackward(const Layer& layer, const LayerCache& cache,
                     const Matrix& grad_output, std::vector<Matrix>& grads) {
  Matrix g;
  switch (layer.activation) {
    case Activation::kIdentity: g = grad_output; break;
    case Activation::kRelu:
      g = grad_output.cwiseProduct(
          cache.pre_activation.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
      break;
    case Activation::kTanh:
      g = grad_output.cwiseProduct(
          (1.0 - cache.output.array().square()).matrix());
      break;
  }
  const Matrix& x = cache.input;

  if (const auto* dense = std::get_if<DenseLayer>(&layer.impl)) {
    grads[0] += x.transpose() * g;
    grads[1] += g.colwise().sum();
    return g * dense->w.transpose();
  }
  if (const auto* flip = std::get_if<VariationalDense>(&layer.impl)) {
    const auto& noise = cache.flipout;
    const Matrix sigma = flip->Sigma();
    const Matrix scaled_eps = sigma.cwiseProduct(noise.weight_eps);
    const Matrix gs = g.cwiseProduct(noise.sign_out);
    const Matrix x_signed = x.cwiseProduct(noise.sign_in);

    grads[0] += x.transpose() * g;
    const Matrix grad_sigma =
        (x_signed.transpose() * gs).cwiseProduct(noise.weight_eps);
    grads[1] += grad_sigma.cwiseProduct(SigmoidOf(flip->rho));
    grads[2] += g.colwise().sum();
    const Matrix grad_bias_sigma =
        g.cwiseProduct(noise.bias_eps).colwise().sum();
    grads[3] += grad_bias_sigma.cwiseProduct(SigmoidOf(flip->bias_rho));

    return g * flip->mu.transpose() +
           (gs * scaled_eps.transpose()).cwiseProduct(noise.sign_in);
  }
  const auto& drop = std::get<DropoutDense>(layer.impl);
  const Matrix masked = x.cwiseProduct(cache.dropout_mask);
  grads[0] += masked.transpose() * g;
  grads[1] += g.colwise().sum();
  return (g * drop.w.transpose()).cwiseProduct(cache.dropout_mask);
}

}  // namespace uqkit
