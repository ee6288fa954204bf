#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fedgraph/errors.hpp"
#include "fedgraph/eval/metrics.hpp"
#include "fedgraph/eval/testbed.hpp"
#include "test_support.hpp"

using namespace fedgraph;
using namespace fedgraph::eval;

TEST_CASE("accuracy counts exact matches") {
  CHECK(accuracy({1, 2, 0, 1}, {1, 2, 1, 1}) == doctest::Approx(0.75));
  CHECK(accuracy({0}, {0}) == 1.0);
  CHECK_THROWS_AS(accuracy({0, 1}, {0}), ShapeError);
  CHECK_THROWS_AS(accuracy({}, {}), ParamError);
}

TEST_CASE("confusion tallies truth by prediction") {
  Eigen::MatrixXi counts = confusion({0, 1, 1, 2, 0}, {0, 1, 2, 2, 1}, 3);
  Eigen::MatrixXi want(3, 3);
  want << 1, 0, 0, 1, 1, 0, 0, 1, 1;
  CHECK(counts == want);
  CHECK_THROWS_AS(confusion({3}, {0}, 3), IndexError);
  CHECK_THROWS_AS(confusion({0}, {-1}, 3), IndexError);
}

TEST_CASE("accuracy equals the trace fraction of the confusion matrix") {
  Rng rng(3);
  std::uniform_int_distribution<int> cls(0, 4);
  std::vector<int> pred(200), truth(200);
  for (int i = 0; i < 200; ++i) {
    pred[static_cast<std::size_t>(i)] = cls(rng);
    truth[static_cast<std::size_t>(i)] = cls(rng);
  }
  Eigen::MatrixXi counts = confusion(pred, truth, 5);
  double via_trace = static_cast<double>(counts.trace()) / 200.0;
  CHECK(accuracy(pred, truth) == doctest::Approx(via_trace).epsilon(1e-12));
}

TEST_CASE("macro f1 averages per-class scores over all classes") {
  // Class 0: precision 1/2, recall 1/2, f1 1/2. Class 1: precision 2/3,
  // recall 2/3, f1 2/3. Class 2 never occurs and contributes 0.
  double got = macro_f1({0, 0, 1, 1, 1}, {0, 1, 1, 1, 0}, 3);
  CHECK(got == doctest::Approx((1.0 / 2.0 + 2.0 / 3.0 + 0.0) / 3.0));

  CHECK(macro_f1({0, 1, 2}, {0, 1, 2}, 3) == 1.0);
  // One perfectly predicted class, one absent class.
  CHECK(macro_f1({0, 0}, {0, 0}, 2) == 0.5);
}

TEST_CASE("weighted f1 scales per-class scores by truth support") {
  // Same counts as the macro case: class 0 has f1 1/2 with support 2,
  // class 1 has f1 2/3 with support 3, class 2 never occurs. Weighted
  // mean = (2 * 1/2 + 3 * 2/3) / 5 = 3/5.
  double got = weighted_f1({0, 0, 1, 1, 1}, {0, 1, 1, 1, 0}, 3);
  CHECK(got == doctest::Approx(0.6));

  CHECK(weighted_f1({0, 1, 2}, {0, 1, 2}, 3) == 1.0);
  // An absent class carries no weight, unlike the macro mean.
  CHECK(weighted_f1({0, 0}, {0, 0}, 2) == 1.0);
  // Widening the class count with empty classes changes nothing.
  CHECK(weighted_f1({0, 0, 1, 1, 1}, {0, 1, 1, 1, 0}, 6) ==
        doctest::Approx(0.6));
}

TEST_CASE("micro f1 equals accuracy for single-label data") {
  Rng rng(29);
  std::uniform_int_distribution<int> cls(0, 3);
  std::vector<int> pred(150), truth(150);
  for (int i = 0; i < 150; ++i) {
    pred[static_cast<std::size_t>(i)] = cls(rng);
    truth[static_cast<std::size_t>(i)] = cls(rng);
  }
  CHECK(micro_f1(pred, truth, 4) == accuracy(pred, truth));
}

TEST_CASE("f1 averaging schemes parse and dispatch") {
  CHECK(parse_f1_average("macro") == F1Average::Macro);
  CHECK(parse_f1_average("micro") == F1Average::Micro);
  CHECK(parse_f1_average("weighted") == F1Average::Weighted);
  CHECK_THROWS_AS(parse_f1_average("harmonic"), ParamError);
  for (F1Average a :
       {F1Average::Macro, F1Average::Micro, F1Average::Weighted})
    CHECK(parse_f1_average(f1_average_name(a)) == a);

  std::vector<int> pred{0, 0, 1, 1, 1}, truth{0, 1, 1, 1, 0};
  CHECK(f1_score(pred, truth, 3, F1Average::Macro) ==
        macro_f1(pred, truth, 3));
  CHECK(f1_score(pred, truth, 3, F1Average::Micro) ==
        micro_f1(pred, truth, 3));
  CHECK(f1_score(pred, truth, 3, F1Average::Weighted) ==
        weighted_f1(pred, truth, 3));
}

TEST_CASE("utility loss is the relative accuracy drop") {
  CHECK(utility_loss(0.8, 1.0) == doctest::Approx(0.2));
  CHECK(utility_loss(0.9941, 0.9941) == 0.0);
  CHECK(utility_loss(1.0, 0.5) == doctest::Approx(-1.0));  // a gain
  CHECK_THROWS_AS(utility_loss(0.5, 0.0), MetricError);
}

TEST_CASE("the theoretical floor matches its formula") {
  BoundParams p;
  p.mu = 2.0;
  p.sigma_g = 0.3;
  p.zeta = 0.5;
  p.d = 10;
  p.m = 4;
  p.batch = 8;
  p.clip = 1.5;
  p.sigma = 0.7;
  double want = (4.0 / 4.0) * (0.09 / 32.0 + 0.25 / 4.0 +
                               10.0 * 0.49 * 2.25 / 4.0);
  CHECK(theoretical_floor(p) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("the floor ignores the clip bound when there is no noise") {
  BoundParams p;
  p.clip = std::numeric_limits<double>::infinity();
  p.sigma = 0.0;
  p.zeta = 0.3;
  CHECK(std::isfinite(theoretical_floor(p)));
  CHECK(theoretical_floor(p) == doctest::Approx(4.0 * 0.09));
}

TEST_CASE("bound parameters are validated") {
  BoundParams p;
  p.mu = 0.0;
  CHECK_THROWS_AS(validate_bound_params(p), ParamError);
  p = BoundParams{};
  p.m = 0;
  CHECK_THROWS_AS(validate_bound_params(p), ParamError);
  p = BoundParams{};
  p.eta = 0.0;
  CHECK_THROWS_AS(validate_bound_params(p), ParamError);
  p = BoundParams{};
  p.sigma = -0.5;
  CHECK_THROWS_AS(validate_bound_params(p), ParamError);
}

TEST_CASE("the noiseless testbed contracts geometrically to the optimum") {
  BoundParams p;
  p.mu = 1.0;
  p.eta = 0.1;
  p.clip = 1e9;  // never binds
  p.sigma = 0.0;
  p.d = 1;
  p.m = 1;
  TestbedResult result = quadratic_testbed(p, 1, 50, 77, 3, 1.0);
  REQUIRE(result.mean_sq_dist.size() == 51);
  CHECK(result.mean_sq_dist[0] == doctest::Approx(1.0));
  // One client at the optimum: w <- (1 - eta mu) w exactly each round.
  for (int t = 0; t < 20; ++t) {
    double ratio = result.mean_sq_dist[static_cast<std::size_t>(t + 1)] /
                   result.mean_sq_dist[static_cast<std::size_t>(t)];
    CHECK(std::abs(ratio - 0.81) < 1e-9);
  }
  CHECK(result.floor == 0.0);
}

TEST_CASE("the plateau grows with the noise variance") {
  BoundParams p;
  p.sigma = 1.0;
  p.clip = 1.0;
  TestbedResult one = quadratic_testbed(p, 5, 300, 7, 10, 0.0);
  p.sigma = 2.0;
  TestbedResult two = quadratic_testbed(p, 5, 300, 7, 10, 0.0);
  auto tail_mean = [](const std::vector<double>& xs) {
    double acc = 0.0;
    std::size_t lo = xs.size() - xs.size() / 5;
    for (std::size_t i = lo; i < xs.size(); ++i) acc += xs[i];
    return acc / static_cast<double>(xs.size() - lo);
  };
  double ratio = tail_mean(two.mean_sq_dist) / tail_mean(one.mean_sq_dist);
  CHECK(ratio > 2.0);   // fourfold in theory
  CHECK(ratio < 8.0);
  CHECK(two.floor == doctest::Approx(4.0 * one.floor));
}

TEST_CASE("heterogeneous optima average out at the server") {
  BoundParams p;
  p.zeta = 2.0;
  p.clip = 1e9;
  p.m = 4;
  TestbedResult result = quadratic_testbed(p, 4, 400, 11, 5, 10.0);
  // With every client sampled each round the mean update pulls w to the
  // average optimum, which is zero by construction.
  CHECK(result.mean_sq_dist.back() < 0.05);
  CHECK(result.floor == doctest::Approx(4.0 * 4.0 / 4.0));
}

TEST_CASE("the testbed is reproducible and validates its setup") {
  BoundParams p;
  p.sigma = 1.0;
  TestbedResult a = quadratic_testbed(p, 3, 20, 5, 4, 10.0);
  TestbedResult b = quadratic_testbed(p, 3, 20, 5, 4, 10.0);
  CHECK(a.mean_sq_dist == b.mean_sq_dist);
  p.m = 7;
  CHECK_THROWS_AS(quadratic_testbed(p, 3, 20, 5, 4, 10.0), ParamError);
  p = BoundParams{};
  CHECK_THROWS_AS(quadratic_testbed(p, 3, 0, 5, 4, 10.0), ParamError);
  CHECK_THROWS_AS(quadratic_testbed(p, 3, 20, 5, 0, 10.0), ParamError);
}
