#include "uqkit/metrics.h"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>

#include "support/oracles.h"
#include "support/random_preds.h"
#include "uqkit/error.h"
#include "uqkit/rng.h"
#include "uqkit/uncertainty.h"

namespace uqkit {
namespace {

using Bits = std::vector<std::uint8_t>;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no uqkit::Error thrown";
  return ErrorCode::kIoError;
}

Bits Labeling(std::size_t n, unsigned mask) {
  Bits y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = (mask >> i) & 1u;
  return y;
}

TEST(Accuracy, Examples) {
  const auto labels01 = LabelSet::Multiclass({0, 1}, 2);
  EXPECT_EQ(Accuracy({{1, 0, 0, 1}, 2, 2}, labels01), 1.0);
  EXPECT_EQ(Accuracy({{0.5, 0.5}, 1, 2}, LabelSet::Multiclass({0}, 2)), 1.0);
  EXPECT_EQ(Accuracy({{0.4, 0.6, 0.7, 0.3}, 2, 2},
                     LabelSet::Multiclass({0, 0}, 2)),
            0.5);
}

TEST(Accuracy, RejectsMultilabel) {
  const auto labels = LabelSet::Multilabel({1, 0}, 1, 2);
  EXPECT_EQ(CodeOf([&] { Accuracy({{0.5, 0.5}, 1, 2}, labels); }),
            ErrorCode::kTaskMismatch);
}

TEST(AveragePrecision, Examples) {
  EXPECT_NEAR(AveragePrecision(std::vector<double>{0.9, 0.8, 0.7},
                               Bits{1, 0, 1}),
              5.0 / 6.0, 1e-15);
  EXPECT_EQ(AveragePrecision(std::vector<double>{0.9, 0.8, 0.2, 0.1},
                             Bits{1, 1, 0, 0}),
            1.0);
  EXPECT_EQ(AveragePrecision(std::vector<double>{0.3}, Bits{1}), 1.0);
  EXPECT_EQ(CodeOf([] {
              AveragePrecision(std::vector<double>{0.3, 0.4}, Bits{0, 0});
            }),
            ErrorCode::kNoPositives);
}

TEST(AveragePrecision, TiesAreAdmittedTogether) {
  // One positive and one negative share the top score: precision 1/2 at
  // recall 1/2, then the second positive arrives at precision 2/3.
  const std::vector<double> s = {0.9, 0.9, 0.5};
  const Bits y = {0, 1, 1};
  EXPECT_NEAR(AveragePrecision(s, y), 0.5 * 0.5 + 0.5 * (2.0 / 3.0), 1e-15);
  EXPECT_NEAR(AveragePrecision(s, y), testing::BruteForceAp(s, y), 1e-15);
}

TEST(Auc, Examples) {
  EXPECT_EQ(Auc(std::vector<double>{0.9, 0.8, 0.3, 0.2}, Bits{1, 1, 0, 0}),
            1.0);
  EXPECT_EQ(Auc(std::vector<double>{0.9, 0.2, 0.8, 0.3}, Bits{1, 0, 0, 1}),
            0.75);
  EXPECT_EQ(Auc(std::vector<double>(5, 0.4), Bits{1, 0, 1, 0, 0}), 0.5);
  EXPECT_EQ(CodeOf([] { Auc(std::vector<double>{0.1, 0.2}, Bits{1, 1}); }),
            ErrorCode::kDegenerateClass);
  EXPECT_EQ(CodeOf([] { Auc(std::vector<double>{0.1, 0.2}, Bits{0, 0}); }),
            ErrorCode::kDegenerateClass);
}

TEST(Metrics, ExhaustiveSmallInstancesMatchBruteForce) {
  Rng rng(21);
  for (std::size_t n = 1; n <= 8; ++n) {
    std::vector<double> s(n);
    for (auto& v : s) v = rng.Uniform();
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      const Bits y = Labeling(n, mask);
      const int pos = std::popcount(mask);
      if (pos > 0) {
        EXPECT_NEAR(AveragePrecision(s, y), testing::BruteForceAp(s, y), 1e-12);
      }
      if (pos > 0 && pos < static_cast<int>(n)) {
        const double auc = Auc(s, y);
        EXPECT_NEAR(auc, testing::BruteForceAuc(s, y), 1e-12);
        EXPECT_NEAR(auc, testing::TrapezoidRocAuc(s, y), 1e-12);
        std::vector<double> neg(n);
        for (std::size_t i = 0; i < n; ++i) neg[i] = -s[i];
        EXPECT_NEAR(auc + Auc(neg, y), 1.0, 1e-12);
      }
    }
  }
}

TEST(Metrics, TiedScoresMatchPairwiseCounting) {
  Rng rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.UniformIndex(12);
    std::vector<double> s(n);
    for (auto& v : s) v = static_cast<double>(rng.UniformIndex(3));
    Bits y(n);
    for (auto& v : y) v = rng.Bernoulli(0.5);
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(Auc(s, y), testing::BruteForceAuc(s, y), 1e-12);
    EXPECT_NEAR(AveragePrecision(s, y), testing::BruteForceAp(s, y), 1e-12);
  }
}

TEST(Metrics, InvariantUnderMonotoneTransform) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20;
    std::vector<double> s(n), t(n);
    Bits y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.Normal();
      t[i] = std::exp(3.0 * s[i]) - 7.0;
      y[i] = rng.Bernoulli(0.4);
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(Auc(s, y), Auc(t, y), 1e-15);
    EXPECT_NEAR(AveragePrecision(s, y), AveragePrecision(t, y), 1e-15);
  }
}

TEST(NormalQuantile, InvertsHighPrecisionCdf) {
  for (double p = 1e-6; p < 1.0 - 1e-6; p += 1e-4) {
    const long double x = NormalQuantile(p);
    const long double phi =
        0.5L * std::erfc(-x / std::sqrt(2.0L));
    EXPECT_NEAR(static_cast<double>(phi), p, 1e-8) << p;
  }
  for (double p : {1e-6, 1e-5, 1e-3, 0.02425, 0.97575, 0.999, 1 - 1e-6}) {
    const long double x = NormalQuantile(p);
    EXPECT_NEAR(static_cast<double>(0.5L * std::erfc(-x / std::sqrt(2.0L))),
                p, 1e-8 * std::max(p, 1e-3));
  }
}

TEST(NormalQuantile, KnownValues) {
  EXPECT_EQ(NormalQuantile(0.5), 0.0);
  EXPECT_NEAR(NormalQuantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(NormalQuantile(0.8413447460685429), 1.0, 1e-12);
  EXPECT_EQ(NormalQuantile(0.0), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(NormalQuantile(1.0), std::numeric_limits<double>::infinity());
  EXPECT_EQ(CodeOf([] { NormalQuantile(1.5); }), ErrorCode::kDomainError);
}

TEST(DPrime, Values) {
  EXPECT_EQ(DPrime(0.5), 0.0);
  EXPECT_NEAR(DPrime(0.971), 2.675, 0.02);
  EXPECT_NEAR(DPrime(0.972), 2.708, 0.02);
  EXPECT_EQ(CodeOf([] { DPrime(1.0); }), ErrorCode::kDomainError);
  EXPECT_EQ(CodeOf([] { DPrime(0.0); }), ErrorCode::kDomainError);
}

TEST(DPrime, OddAndIncreasing) {
  double prev = -std::numeric_limits<double>::infinity();
  for (double a = 0.001; a < 1.0; a += 0.001) {
    const double d = DPrime(a);
    EXPECT_GT(d, prev);
    EXPECT_NEAR(DPrime(1.0 - a), -d, 1e-10);
    prev = d;
  }
}

TEST(MacroMetrics, PerfectPredictorSaturatesDPrime) {
  const McPredictions preds({1, 0, 0, 1, 1, 0, 0, 1}, 1, 4, 2,
                            Task::kMulticlass);
  const auto report = MacroMetrics(preds, LabelSet::Multiclass({0, 1, 0, 1}, 2));
  EXPECT_EQ(report.map_macro, 1.0);
  EXPECT_EQ(report.auc_macro, 1.0);
  EXPECT_EQ(report.accuracy, 1.0);
  EXPECT_TRUE(report.d_prime_saturated);
  EXPECT_EQ(report.d_prime, std::numeric_limits<double>::infinity());
}

TEST(MacroMetrics, ClassWithoutPositivesIsSkipped) {
  const McPredictions preds({0.2, 0.7, 0.1, 0.6, 0.3, 0.1}, 1, 2, 3,
                            Task::kMultilabel);
  const auto labels = LabelSet::Multilabel({1, 0, 0, 0, 1, 0}, 2, 3);
  const auto report = MacroMetrics(preds, labels);
  EXPECT_EQ(report.skipped_classes, std::vector<std::size_t>{2});
  EXPECT_FALSE(report.per_class_ap[2].has_value());
  EXPECT_FALSE(report.accuracy.has_value());
  EXPECT_NEAR(report.map_macro,
              0.5 * (*report.per_class_ap[0] + *report.per_class_ap[1]),
              1e-15);
}

TEST(MacroMetrics, AllSkippedThrows) {
  const McPredictions preds({0.2, 0.7}, 1, 1, 2, Task::kMultilabel);
  EXPECT_EQ(CodeOf([&] {
              MacroMetrics(preds, LabelSet::Multilabel({0, 0}, 1, 2));
            }),
            ErrorCode::kAllClassesSkipped);
}

TEST(MacroMetrics, RandomThreeClassMatchesOracle) {
  Rng rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const auto preds =
        testing::RandomPredictions(3, 8, 3, Task::kMulticlass, 1.0, rng);
    std::vector<std::int64_t> idx(8);
    for (std::size_t i = 0; i < 8; ++i) idx[i] = static_cast<std::int64_t>(i % 3);
    const auto labels = LabelSet::Multiclass(idx, 3);
    const auto mean = ComputeMeanProbabilities(preds);
    const auto report = MacroMetrics(preds, labels);
    double ap_sum = 0.0, auc_sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      std::vector<double> s(8);
      Bits y(8);
      for (std::size_t i = 0; i < 8; ++i) {
        s[i] = mean.at(i, c);
        y[i] = idx[i] == static_cast<std::int64_t>(c);
      }
      ap_sum += testing::BruteForceAp(s, y);
      auc_sum += testing::BruteForceAuc(s, y);
      EXPECT_NEAR(*report.per_class_ap[c], testing::BruteForceAp(s, y), 1e-12);
    }
    EXPECT_NEAR(report.map_macro, ap_sum / 3, 1e-12);
    EXPECT_NEAR(report.auc_macro, auc_sum / 3, 1e-12);
    EXPECT_NEAR(report.d_prime, DPrime(report.auc_macro), 1e-15);
  }
}

}  // namespace
}  // namespace uqkit
