#ifndef UQKIT_LAYERS_H_
#define UQKIT_LAYERS_H_

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uqkit/rng.h"

namespace uqkit {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kMinSigma = 1e-6;

// Numerically stable softplus ln(1 + e^x) and its inverse.
double Softplus(double x);
double InverseSoftplus(double y);
double Sigmoid(double x);

enum class Activation { kIdentity, kRelu, kTanh };
std::string_view ActivationName(Activation activation);
Activation ParseActivation(std::string_view name);

// Plain affine layer y = x W + b.
struct DenseLayer {
  Matrix w;  // in x out
  Matrix b;  // 1 x out
};

// Gaussian mean-field posterior over weights and biases with sigma =
// softplus(rho), against an isotropic Gaussian prior.
struct VariationalDense {
  Matrix mu;             // in x out
  Matrix rho;            // in x out
  Matrix bias_mu;        // 1 x out
  Matrix bias_rho;       // 1 x out
  Matrix prior_mu;       // in x out
  Matrix prior_bias_mu;  // 1 x out
  double prior_sigma = 1.0;

  Matrix Sigma() const;
  Matrix BiasSigma() const;
};

// Inverted dropout on the layer input followed by an affine map. The mask
// is sampled on every forward pass, including inference.
struct DropoutDense {
  Matrix w;  // in x out
  Matrix b;  // 1 x out
  double rate = 0.5;
};

enum class LayerKind { kDeterministic, kFlipout, kDropout };
std::string_view LayerKindName(LayerKind kind);
LayerKind ParseLayerKind(std::string_view name);

struct Layer {
  std::variant<DenseLayer, VariationalDense, DropoutDense> impl;
  Activation activation = Activation::kIdentity;
  bool frozen = false;

  LayerKind kind() const { return static_cast<LayerKind>(impl.index()); }
  std::size_t in_dim() const;
  std::size_t out_dim() const;

  // Trainable tensors in a fixed order; gradients use the same order.
  std::vector<Matrix*> Parameters();
  std::vector<const Matrix*> Parameters() const;
  std::vector<std::string> ParameterNames() const;
};

// Default initializers. Deterministic and dropout layers draw weights and
// biases from U(-1/sqrt(in), 1/sqrt(in)). Flipout layers use N(0, 0.1) means,
// rho ~ N(-3, 0.1), and a N(0, 1) prior.
Layer MakeDenseLayer(std::size_t in, std::size_t out, Activation act, Rng& rng);
Layer MakeFlipoutLayer(std::size_t in, std::size_t out, Activation act,
                       Rng& rng, double prior_sigma = 1.0);
Layer MakeDropoutLayer(std::size_t in, std::size_t out, Activation act,
                       double rate, Rng& rng);

// Noise for one Flipout forward call on a batch of B rows.
struct FlipoutNoise {
  Matrix weight_eps;  // in x out, shared across the batch
  Matrix sign_in;     // B x in, +-1
  Matrix sign_out;    // B x out, +-1
  Matrix bias_eps;    // B x out, per example
};

FlipoutNoise SampleFlipoutNoise(const VariationalDense& layer,
                                std::size_t batch, Rng& rng);

// y = x mu + b_mu + ((x o r) (sigma o E)) o s + sigma_b o eps_b
Matrix FlipoutForward(const VariationalDense& layer, const Matrix& x,
                      const FlipoutNoise& noise);
Matrix FlipoutForward(const VariationalDense& layer, const Matrix& x, Rng& rng);

// Mask entries are 0 or 1/(1-rate).
Matrix SampleDropoutMask(std::size_t batch, std::size_t in, double rate,
                         Rng& rng);
Matrix McDropoutForward(const DropoutDense& layer, const Matrix& x,
                        const Matrix& mask);
Matrix McDropoutForward(const DropoutDense& layer, const Matrix& x, Rng& rng);

// Closed-form KL(q || p) summed over weights and biases.
double KlGaussian(const VariationalDense& layer);
// d KL / d(mu, rho, bias_mu, bias_rho), scaled by `scale` and added to
// `grads` (Parameters() order).
void AccumulateKlGradient(const VariationalDense& layer, double scale,
                          std::vector<Matrix>& grads);

// Everything Backward needs from one forward call.
struct LayerCache {
  Matrix input;
  Matrix pre_activation;
  Matrix output;
  FlipoutNoise flipout;
  Matrix dropout_mask;
};

Matrix LayerForward(const Layer& layer, const Matrix& x, Rng& rng,
                    LayerCache* cache);

// Given dL/d(output), adds parameter gradients into `grads` and returns
// dL/d(input).
Matrix LayerBackward(const Layer& layer, const LayerCache& cache,
                     const Matrix& grad_output, std::vector<Matrix>& grads);

}  // namespace uqkit

#endif  // UQKIT_LAYERS_H_
