#include <cmath>

#include "doctest.h"
#include "edsim/metrics.hpp"
#include "edsim/rng.hpp"

using namespace edsim;

namespace {

// binary MCC from the 2x2 confusion entries, the brute-force oracle
double binary_mcc(double tp, double fn, double fp, double tn) {
  double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  if (den == 0) return 0;
  return (tp * tn - fp * fn) / den;
}

}  // namespace

TEST_CASE("perfect and constant predictors") {
  std::vector<uint8_t> truths, preds;
  for (int i = 0; i < 64; ++i) truths.push_back(uint8_t(i % 8));

  SUBCASE("perfect prediction gives mcc 1 and accuracy 100%") {
    preds = truths;
    ClassificationReport r = accuracy_mcc(preds, truths);
    CHECK(r.mcc == 1.0);
    CHECK(r.overall_accuracy == 1.0);
    for (int k = 0; k < 8; ++k) {
      CHECK(r.accuracy[size_t(k)] == 1.0);
      CHECK(r.recall[size_t(k)] == 1.0);
    }
  }

  SUBCASE("constant prediction on balanced truths gives mcc 0 exactly") {
    preds.assign(truths.size(), 3);
    ClassificationReport r = accuracy_mcc(preds, truths);
    CHECK(r.mcc == 0.0);
    CHECK(r.overall_accuracy == doctest::Approx(1.0 / 8));
    CHECK(r.accuracy[3] == doctest::Approx(1.0 / 8));
    CHECK(r.accuracy[0] == -1.0);  // never predicted
  }
}

TEST_CASE("hand confusion matrix [[2,1],[1,2]] has mcc 1/3") {
  Confusion m{};
  m[0][0] = 2;
  m[0][1] = 1;
  m[1][0] = 1;
  m[1][1] = 2;
  CHECK(multiclass_mcc(m) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("multiclass mcc reduces to the binary formula on 2x2 matrices") {
  Rng rng(21);
  for (int rep = 0; rep < 1000; ++rep) {
    int64_t tp = int64_t(rng.below(50)), fn = int64_t(rng.below(50));
    int64_t fp = int64_t(rng.below(50)), tn = int64_t(rng.below(50));
    if (tp + fn + fp + tn == 0) continue;
    Confusion m{};
    m[0][0] = tp;
    m[0][1] = fn;
    m[1][0] = fp;
    m[1][1] = tn;
    double expect = binary_mcc(double(tp), double(fn), double(fp), double(tn));
    CHECK(std::abs(multiclass_mcc(m) - expect) < 1e-12);
  }
}

TEST_CASE("per-class accuracy is the precision-style ratio") {
  // truths: 0 0 1 1; predictions: 0 1 1 1
  std::vector<uint8_t> truths{0, 0, 1, 1}, preds{0, 1, 1, 1};
  ClassificationReport r = accuracy_mcc(preds, truths);
  CHECK(r.accuracy[0] == 1.0);                     // 1 of 1 predicted-0 correct
  CHECK(r.accuracy[1] == doctest::Approx(2.0 / 3));  // 2 of 3 predicted-1 correct
  CHECK(r.recall[0] == 0.5);
  CHECK(r.recall[1] == 1.0);
  CHECK(r.overall_accuracy == 0.75);
}

TEST_CASE("accuracy_mcc input validation") {
  std::vector<uint8_t> empty;
  CHECK_THROWS(accuracy_mcc(empty, empty));
  std::vector<uint8_t> a{1}, b{1, 2};
  CHECK_THROWS(accuracy_mcc(a, b));
}

TEST_CASE("mean_ci") {
  SUBCASE("constant list has zero halfwidth") {
    std::vector<double> v(16, 4.25);  // dyadic, the mean is exact
    MeanCi r = mean_ci(v);
    CHECK(r.mean == 4.25);
    CHECK(r.halfwidth == 0.0);
    CHECK_FALSE(r.degenerate);

    std::vector<double> w(10, 4.2);
    CHECK(mean_ci(w).halfwidth == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("single value is degenerate with zero halfwidth") {
    std::vector<double> v{3.0};
    MeanCi r = mean_ci(v);
    CHECK(r.mean == 3.0);
    CHECK(r.halfwidth == 0.0);
    CHECK(r.degenerate);
  }

  SUBCASE("hand formula on {0, 10}") {
    std::vector<double> v{0.0, 10.0};
    MeanCi r = mean_ci(v);
    CHECK(r.mean == 5.0);
    // 1.96 * sqrt(50) / sqrt(2) = 9.8
    CHECK(r.halfwidth == doctest::Approx(9.8).epsilon(1e-12));
  }

  SUBCASE("empty input rejected") {
    std::vector<double> v;
    CHECK_THROWS(mean_ci(v));
  }
}
