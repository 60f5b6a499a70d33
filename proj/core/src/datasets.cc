#include "uqkit/datasets.h"

#include <cmath>
#include <numbers>

#include "uqkit/error.h"

namespace uqkit {
namespace {

Dataset CircleBlobs(const Matrix& projection, std::size_t classes,
                    std::size_t count, bool round_robin, double radius,
                    double spread, double nuisance, double phase, Rng& rng) {
  const auto dim = projection.cols();
  Dataset d;
  d.task = Task::kMulticlass;
  d.x.resize(static_cast<Eigen::Index>(count), dim);
  std::vector<std::int64_t> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t k = round_robin ? i % classes : rng.UniformIndex(classes);
    const double angle =
        phase + 2.0 * std::numbers::pi * static_cast<double>(k) /
                    static_cast<double>(classes);
    Eigen::RowVector2d z(radius * std::cos(angle) + spread * rng.Normal(),
                         radius * std::sin(angle) + spread * rng.Normal());
    auto row = d.x.row(static_cast<Eigen::Index>(i));
    row = z * projection;
    for (Eigen::Index j = 0; j < dim; ++j) row(j) += nuisance * rng.Normal();
    labels[i] = static_cast<std::int64_t>(k);
  }
  d.targets = OneHot(labels, classes);
  return d;
}

}  // namespace

Dataset MakeTwoMoons(std::size_t n, double noise, Rng& rng) {
  Dataset d;
  d.task = Task::kMulticlass;
  d.x.resize(static_cast<Eigen::Index>(n), 2);
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(i % 2);
    const double t = std::numbers::pi * rng.Uniform();
    double px, py;
    if (k == 0) {
      px = std::cos(t);
      py = std::sin(t);
    } else {
      px = 1.0 - std::cos(t);
      py = 0.5 - std::sin(t);
    }
    d.x(static_cast<Eigen::Index>(i), 0) = px + noise * rng.Normal();
    d.x(static_cast<Eigen::Index>(i), 1) = py + noise * rng.Normal();
    labels[i] = k;
  }
  d.targets = OneHot(labels, 2);
  return d;
}

TransferTask MakeTransferTask(const TransferTaskSpec& spec, std::uint64_t seed) {
  if (spec.input_dim < 2 || spec.upstream_classes < 2 ||
      spec.downstream_classes < 2) {
    throw Error(ErrorCode::kConfigError, "transfer task dimensions too small");
  }
  const Rng root(seed);
  Rng proj_rng = root.Derive(0);
  // Orthonormal 2 x D projection so latent distances are preserved.
  Matrix raw(2, static_cast<Eigen::Index>(spec.input_dim));
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = proj_rng.Normal();
  raw.row(0).normalize();
  raw.row(1) -= raw.row(1).dot(raw.row(0)) * raw.row(0);
  raw.row(1).normalize();

  Rng up_rng = root.Derive(1);
  Rng train_rng = root.Derive(2);
  Rng test_rng = root.Derive(3);
  Rng ood_rng = root.Derive(4);

  TransferTask task;
  task.upstream =
      CircleBlobs(raw, spec.upstream_classes,
                  spec.upstream_classes * spec.upstream_per_class, true,
                  spec.radius, spec.spread, spec.nuisance, 0.0, up_rng);
  task.downstream_train =
      CircleBlobs(raw, spec.downstream_classes, spec.downstream_train, true,
                  spec.radius, spec.spread, spec.nuisance, spec.rotation,
                  train_rng);
  task.downstream_test =
      CircleBlobs(raw, spec.downstream_classes, spec.downstream_test, true,
                  spec.radius, spec.spread, spec.nuisance, spec.rotation,
                  test_rng);

  // OOD: latent points well outside the class circle.
  const std::size_t n_ood = spec.downstream_test / 2;
  task.ood_inputs.resize(static_cast<Eigen::Index>(n_ood),
                         static_cast<Eigen::Index>(spec.input_dim));
  for (std::size_t i = 0; i < n_ood; ++i) {
    const double angle = 2.0 * std::numbers::pi * ood_rng.Uniform();
    const double r = 3.0 * spec.radius;
    Eigen::RowVector2d z(r * std::cos(angle), r * std::sin(angle));
    auto row = task.ood_inputs.row(static_cast<Eigen::Index>(i));
    row = z * raw;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      row(j) += spec.nuisance * ood_rng.Normal();
    }
  }
  return task;
}

SyntheticInstance MakeCalibratedInstance(std::size_t items,
                                         std::size_t samples,
                                         std::size_t classes,
                                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> probs(samples * items * classes);
  std::vector<std::int64_t> labels(items);
  std::vector<double> base(classes), mean(classes), logits(classes);
  for (std::size_t n = 0; n < items; ++n) {
    const double difficulty = rng.Uniform();
    const std::size_t favourite = rng.UniformIndex(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      base[c] = rng.Normal() + (c == favourite ? 6.0 * (1.0 - difficulty) : 0.0);
    }
    const double spread = 0.25 + 1.5 * difficulty;
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t m = 0; m < samples; ++m) {
      double max = -1e300;
      for (std::size_t c = 0; c < classes; ++c) {
        logits[c] = base[c] + spread * rng.Normal();
        max = std::max(max, logits[c]);
      }
      double z = 0.0;
      for (std::size_t c = 0; c < classes; ++c) {
        logits[c] = std::exp(logits[c] - max);
        z += logits[c];
      }
      for (std::size_t c = 0; c < classes; ++c) {
        const double p = logits[c] / z;
        probs[(m * items + n) * classes + c] = p;
        mean[c] += p / static_cast<double>(samples);
      }
    }
    // Label drawn from the MC-mean distribution: calibrated by construction.
    double u = rng.Uniform();
    std::size_t label = classes - 1;
    for (std::size_t c = 0; c < classes; ++c) {
      if (u < mean[c]) {
        label = c;
        break;
      }
      u -= mean[c];
    }
    labels[n] = static_cast<std::int64_t>(label);
  }
  return {McPredictions(std::move(probs), samples, items, classes,
                        Task::kMulticlass),
          LabelSet::Multiclass(std::move(labels), classes)};
}

}  // namespace uqkit
