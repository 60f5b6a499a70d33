// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "demo.h"
#include "support/gradcheck.h"
#include "support/oracles.h"
#include "support/random_preds.h"
#include "uqkit/datasets.h"
#include "uqkit/layers.h"
#include "uqkit/metrics.h"
#include "uqkit/retention.h"
#include "uqkit/tensor_io.h"
#include "uqkit/uncertainty.h"

namespace uqkit {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const fs::path kDataDir(UQKIT_TEST_DATA_DIR);
const fs::path kConfigDir(UQKIT_CONFIG_DIR);

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char* format, auto... values) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, values...);
  return buf;
}

nlohmann::json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

Outcome DecompositionIdentity() {
  const auto start = Clock::now();
  Rng rng(1001);
  double worst_gap = 0.0, worst_epistemic = 0.0;
  std::size_t items = 0;
  for (int i = 0; i < 1000; ++i) {
    const Task task = i % 2 ? Task::kMultilabel : Task::kMulticlass;
    const std::size_t m = 1 + rng.UniformIndex(16);
    const std::size_t c = 2 + rng.UniformIndex(31);
    const std::size_t n = 1 + rng.UniformIndex(32);
    // Scales up to 20 push many probabilities to within 1e-9 of 0 or 1.
    const double scale = 0.05 + 20.0 * rng.Uniform() * rng.Uniform();
    const auto t =
        Decompose(testing::RandomPredictions(m, n, c, task, scale, rng));
    for (std::size_t k = 0; k < n; ++k) {
      worst_gap = std::max(
          worst_gap, std::abs(t.total[k] - (t.aleatoric[k] + t.epistemic[k])));
      worst_epistemic = std::min(worst_epistemic, t.epistemic[k]);
    }
    items += n;
  }
  const double secs = Since(start);
  return {worst_gap <= 1e-9 && worst_epistemic >= -1e-12 && secs < 5.0,
          Fmt("1000 instances, %zu items, max |gap| %.2e, min epistemic "
              "%.2e, %.2f s",
              items, worst_gap, worst_epistemic, secs)};
}

Outcome ClosedValues() {
  const auto oracle = ReadJson(kDataDir / "oracle_values.json");
  // Reference values rounded to seven digits.
  const double expected_mc[3] = {0.6108643, 0.5091151, 0.1017492};
  const double expected_ml[3] = {1.2217286, 1.0958221, 0.1259065};
  double worst = 0.0;
  auto check = [&](const char* key, Task task, const double* rounded) {
    const auto& ref = oracle[key];
    std::vector<double> flat;
    for (const auto& row : ref["samples"]) {
      for (double p : row) flat.push_back(p);
    }
    const std::size_t m = ref["samples"].size();
    const std::size_t c = flat.size() / m;
    const auto t = Decompose(McPredictions(flat, m, 1, c, task));
    const double got[3] = {t.total[0], t.aleatoric[0], t.epistemic[0]};
    const double oracle_values[3] = {ref["total"], ref["aleatoric"],
                                     ref["epistemic"]};
    for (int i = 0; i < 3; ++i) {
      worst = std::max(worst, std::abs(got[i] - oracle_values[i]));
      worst = std::max(worst, std::abs(got[i] - rounded[i]));
    }
  };
  check("multiclass", Task::kMulticlass, expected_mc);
  check("multilabel", Task::kMultilabel, expected_ml);
  return {worst <= 1e-6,
          Fmt("max deviation from oracle / rounded reference values %.2e", worst)};
}

Outcome Collapse() {
  Rng rng(1003);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Task task = i % 2 ? Task::kMultilabel : Task::kMulticlass;
    const std::size_t c = 2 + rng.UniformIndex(31);
    const std::size_t n = 1 + rng.UniformIndex(16);
    const double scale = 0.1 + 10.0 * rng.Uniform();
    const auto single = Decompose(
        testing::RandomPredictions(1, n, c, task, scale, rng));
    const auto identical = Decompose(testing::RepeatFirstSample(
        testing::RandomPredictions(2, n, c, task, scale, rng),
        2 + rng.UniformIndex(15)));
    for (std::size_t k = 0; k < n; ++k) {
      worst = std::max({worst, std::abs(single.epistemic[k]),
                        std::abs(identical.epistemic[k])});
    }
  }
  return {worst <= 1e-12,
          Fmt("100 M=1 + 100 identical-sample cases, max |epistemic| %.2e",
              worst)};
}

Outcome DPrimeRows() {
  struct Row {
    const char* name;
    double auc;
    double d_prime;
  };
  const Row rows[] = {{"Det", 0.973, 2.732},
                      {"Drop", 0.975, 2.762},
                      {"Flip", 0.972, 2.708},
                      {"PANN", 0.971, 2.675}};
  bool pass = true;
  std::string detail;
  for (const auto& r : rows) {
    const double lo = DPrime(r.auc - 0.0005);
    const double hi = DPrime(r.auc + 0.0005);
    const bool ok = lo <= r.d_prime && r.d_prime <= hi;
    pass = pass && ok;
    detail += Fmt("%s %.3f in [%.4f, %.4f]%s; ", r.name, r.d_prime, lo, hi,
                  ok ? "" : " MISS");
  }
  return {pass, detail};
}

Outcome MetricOracles() {
  Rng rng(1005);
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    // Distinct scores: a random permutation of 1..n scaled.
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.Shuffle(perm);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = (perm[i] + 1) / (n + 1.0);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      std::vector<std::uint8_t> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = (mask >> i) & 1u;
      const int pos = std::popcount(mask);
      if (pos > 0) {
        worst = std::max(worst, std::abs(AveragePrecision(s, y) -
                                         testing::BruteForceAp(s, y)));
        ++cases;
      }
      if (pos > 0 && pos < static_cast<int>(n)) {
        worst = std::max(worst,
                         std::abs(Auc(s, y) - testing::BruteForceAuc(s, y)));
        ++cases;
      }
    }
  }
  // Heavily tied scores against pairwise counting with half credit.
  double worst_ties = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.UniformIndex(15);
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.UniformIndex(3));
      y[i] = rng.Bernoulli(0.5);
    }
    y[0] = 1;
    y[1] = 0;
    worst_ties = std::max(worst_ties,
                          std::abs(Auc(s, y) - testing::BruteForceAuc(s, y)));
  }
  return {worst <= 1e-12 && worst_ties <= 1e-12,
          Fmt("%zu exhaustive AP/AUC cases max err %.2e; 500 tied cases max "
              "err %.2e",
              cases, worst, worst_ties)};
}

Outcome GradientSuite() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::string worst_case;
  std::size_t coordinates = 0;
  for (std::size_t i = 0; i < 54; ++i) {
    const auto c = testing::RandomGradCase(i, 1006);
    const auto r = testing::CheckElboGradients(
        c.net, c.x, c.targets, c.kl_scale, c.mc_samples, c.noise_seed);
    coordinates += r.coordinates;
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      worst_case = c.description + " " + r.worst;
    }
  }
  const double secs = Since(start);
  return {worst <= 1e-4 && secs < 30.0,
          Fmt("54 configurations (layer kind x task x activation), %zu "
              "coordinates, max rel err %.2e (%s), %.2f s",
              coordinates, worst, worst_case.c_str(), secs)};
}

Outcome KlCorrectness() {
  Rng rng(1007);
  int within = 0;
  double worst_z = 0.0;
  for (int i = 0; i < 20; ++i) {
    VariationalDense v;
    v.mu = Matrix::Constant(1, 1, rng.Normal());
    v.rho = Matrix::Constant(1, 1, InverseSoftplus(0.1 + rng.Uniform()));
    v.bias_mu = Matrix::Constant(1, 1, rng.Normal());
    v.bias_rho = Matrix::Constant(1, 1, InverseSoftplus(0.1 + rng.Uniform()));
    v.prior_mu = Matrix::Constant(1, 1, 0.5 * rng.Normal());
    v.prior_bias_mu = Matrix::Constant(1, 1, 0.5 * rng.Normal());
    v.prior_sigma = 0.3 + 1.5 * rng.Uniform();
    const auto w = testing::MonteCarloGaussianKl(
        v.mu(0, 0), Softplus(v.rho(0, 0)), v.prior_mu(0, 0), v.prior_sigma,
        1000000, 2 * i);
    const auto b = testing::MonteCarloGaussianKl(
        v.bias_mu(0, 0), Softplus(v.bias_rho(0, 0)), v.prior_bias_mu(0, 0),
        v.prior_sigma, 1000000, 2 * i + 1);
    const double se = std::hypot(w.standard_error, b.standard_error);
    const double z = std::abs(KlGaussian(v) - (w.mean + b.mean)) / se;
    worst_z = std::max(worst_z, z);
    within += z <= 3.0;
  }
  VariationalDense q;
  q.mu = Matrix::Constant(2, 3, 0.37);
  q.rho = Matrix::Constant(2, 3, InverseSoftplus(0.8));
  q.bias_mu = Matrix::Constant(1, 3, -1.2);
  q.bias_rho = Matrix::Constant(1, 3, InverseSoftplus(0.8));
  q.prior_mu = q.mu;
  q.prior_bias_mu = q.bias_mu;
  q.prior_sigma = Softplus(InverseSoftplus(0.8));
  const double self = KlGaussian(q);
  return {within == 20 && self == 0.0,
          Fmt("%d/20 layers within 3 SE (max %.2f SE, 1e6 draws each); "
              "KL(q||q) = %g",
              within, worst_z, self)};
}

Outcome Calibration() {
  const auto inst = MakeCalibratedInstance(1000, 20, 10, 0);
  const std::vector<double> fractions = {0.2, 1.0};
  const auto a = ComputeRetentionCurve(inst.preds, inst.labels,
                                       Measure::kEntropy, fractions, 20, 0);
  const auto b = ComputeRetentionCurve(inst.preds, inst.labels,
                                       Measure::kEntropy, fractions, 20, 0);
  const double gain = a.metric_mean[0] - a.metric_mean[1];
  const bool deterministic =
      a.metric_mean == b.metric_mean && a.ci_half_width == b.ci_half_width;
  return {gain >= 0.05 && deterministic,
          Fmt("entropy-sorted accuracy %.4f at 20%% vs %.4f at 100%% (gain "
              "%.4f, 20 replications), rerun identical: %s",
              a.metric_mean[0], a.metric_mean[1], gain,
              deterministic ? "yes" : "no")};
}

Outcome TransferTrend() {
  const auto base =
      tools::DemoConfigFromJson(ReadJson(kConfigDir / "demo_default.json"));
  bool pass = true;
  std::string detail;
  for (auto s : {Strategy::kFlip, Strategy::kDetFlip, Strategy::kDrop}) {
    double fine = 0.0, scratch = 0.0, slowest = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto cfg = base;
      cfg.strategy = s;
      cfg.seed = seed;
      cfg.scratch_baseline = true;
      const auto r = tools::RunDemo(cfg);
      fine += r.accuracy_fine_tuned / 10.0;
      scratch += *r.accuracy_scratch / 10.0;
      slowest = std::max(slowest, r.seconds);
    }
    const bool ok = fine >= scratch && slowest < 60.0;
    pass = pass && ok;
    detail += Fmt("%s fine-tuned %.4f vs scratch %.4f, slowest run %.2f s; ",
                  std::string(StrategyName(s)).c_str(), fine, scratch,
                  slowest);
  }
  return {pass, detail};
}

Outcome FormatRoundTrip() {
  Rng rng(1010);
  int identical = 0;
  for (int i = 0; i < 500; ++i) {
    std::vector<std::size_t> shape(rng.UniformIndex(5));
    std::size_t count = 1;
    for (auto& d : shape) {
      d = rng.UniformIndex(6);
      count *= d;
    }
    TensorFile t;
    t.shape = shape;
    switch (i % 3) {
      case 0: {
        std::vector<float> v(count);
        for (auto& x : v) x = static_cast<float>(rng.Normal() * 1e3);
        t.data = std::move(v);
        break;
      }
      case 1: {
        std::vector<double> v(count);
        for (auto& x : v) x = std::ldexp(rng.Normal(), rng.UniformIndex(200) - 100);
        t.data = std::move(v);
        break;
      }
      default: {
        std::vector<std::int64_t> v(count);
        for (auto& x : v) x = static_cast<std::int64_t>(rng());
        t.data = std::move(v);
      }
    }
    const auto bytes = WriteNpy(t);
    identical += ReadNpy(bytes) == t && WriteNpy(ReadNpy(bytes)) == bytes;
  }
  // Writer output for a fixed input matches the bytes numpy produced.
  const auto corpus = ReadJson(kDataDir / "npy_corpus" / "corpus.json");
  int stable = 0, total = 0;
  for (const auto& [name, entry] : corpus.items()) {
    ++total;
    const auto values = entry["values"].get<std::vector<double>>();
    const auto shape = entry["shape"].get<std::vector<std::size_t>>();
    const std::string descr = entry["descr"];
    TensorFile t;
    t.shape = shape;
    if (descr == "<f4") {
      t.data = std::vector<float>(values.begin(), values.end());
    } else if (descr == "<f8") {
      t.data = values;
    } else {
      t.data = std::vector<std::int64_t>(values.begin(), values.end());
    }
    const auto golden = ReadFileBytes(kDataDir / "npy_corpus" / (name + ".npy"));
    stable += WriteNpy(t) == golden && WriteNpy(t) == WriteNpy(t);
  }
  return {identical == 500 && stable == total,
          Fmt("%d/500 random tensors round-trip; %d/%d fixed inputs "
              "byte-identical to numpy output",
              identical, stable, total)};
}

}  // namespace
}  // namespace uqkit

int main() {
  using uqkit::Outcome;
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "decomposition identity", uqkit::DecompositionIdentity},
      {2, "closed-value decomposition checks", uqkit::ClosedValues},
      {3, "M=1 and identical-sample collapse", uqkit::Collapse},
      {4, "d-prime consistency with reference rows", uqkit::DPrimeRows},
      {5, "AP/AUC exhaustive oracles", uqkit::MetricOracles},
      {6, "gradient finite-difference suite", uqkit::GradientSuite},
      {7, "KL closed form vs Monte Carlo", uqkit::KlCorrectness},
      {8, "calibration retention gain", uqkit::Calibration},
      {9, "transfer beats training from scratch", uqkit::TransferTrend},
      {10, "NPY format round-trip", uqkit::FormatRoundTrip},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
