#include "safeshed/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "doctest.h"

using namespace safeshed;

TEST_SUITE("policy") {

TEST_CASE("welford matches the batch formulas") {
  SUBCASE("single observation") {
    RunningStats stats(1);
    const double x[] = {5.0};
    stats.update(x);
    CHECK(stats.count == 1);
    CHECK(stats.mean[0] == 5.0);
    CHECK(stats.std_dev()[0] == 0.0);
  }
  SUBCASE("documented two-point case") {
    RunningStats stats(1);
    for (double v : {1.0, 3.0}) {
      const double x[] = {v};
      stats.update(x);
    }
    CHECK(stats.mean[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(stats.std_dev()[0] == doctest::Approx(1.0).epsilon(1e-12));
    const double obs[] = {3.0};
    CHECK(stats.normalize(obs)[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("three-point stream against the population variance") {
    RunningStats stats(1);
    for (double v : {1.0, 2.0, 3.0}) {
      const double x[] = {v};
      stats.update(x);
    }
    CHECK(stats.mean[0] == doctest::Approx(2.0).epsilon(1e-12));
    const double sd = stats.std_dev()[0];
    CHECK(sd * sd == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  }
  SUBCASE("rejects non-finite observations") {
    RunningStats stats(1);
    const double bad[] = {std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(stats.update(bad), std::invalid_argument);
    const double inf[] = {std::numeric_limits<double>::infinity()};
    CHECK_THROWS_AS(stats.update(inf), std::invalid_argument);
  }
  SUBCASE("rejects dimension mismatch") {
    RunningStats stats(2);
    const double x[] = {1.0};
    CHECK_THROWS_AS(stats.update(x), std::invalid_argument);
    CHECK_THROWS_AS(stats.normalize(x), std::invalid_argument);
  }
}

TEST_CASE("streamed stats equal batch stats within 1e-9") {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> noise(0.5, 2.0);
  const int n = 10000;
  const int dim = 4;
  RunningStats stats(dim);
  std::vector<std::vector<double>> batch;
  for (int k = 0; k < n; ++k) {
    std::vector<double> obs(dim);
    for (double& x : obs) {
      x = noise(gen);
    }
    stats.update(obs);
    batch.push_back(obs);
  }
  for (int d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (const auto& obs : batch) {
      mean += obs[static_cast<std::size_t>(d)];
    }
    mean /= n;
    double var = 0.0;
    for (const auto& obs : batch) {
      const double dev = obs[static_cast<std::size_t>(d)] - mean;
      var += dev * dev;
    }
    var /= n;
    CHECK(stats.mean[static_cast<std::size_t>(d)] == doctest::Approx(mean).epsilon(1e-9));
    CHECK(stats.std_dev()[static_cast<std::size_t>(d)] ==
          doctest::Approx(std::sqrt(var)).epsilon(1e-9));
  }
}

TEST_CASE("stats are permutation invariant within 1e-12") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> values(10000);
  for (double& v : values) {
    v = noise(gen);
  }
  RunningStats forward(1);
  for (double v : values) {
    const double x[] = {v};
    forward.update(x);
  }
  std::shuffle(values.begin(), values.end(), gen);
  RunningStats shuffled(1);
  for (double v : values) {
    const double x[] = {v};
    shuffled.update(x);
  }
  CHECK(std::abs(forward.mean[0] - shuffled.mean[0]) <= 1e-12);
  CHECK(std::abs(forward.std_dev()[0] - shuffled.std_dev()[0]) <= 1e-12);
}

TEST_CASE("merge equals a single stream") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> noise(-1.0, 3.0);
  RunningStats whole(2);
  RunningStats part_a(2);
  RunningStats part_b(2);
  for (int k = 0; k < 500; ++k) {
    std::vector<double> obs{noise(gen), noise(gen)};
    whole.update(obs);
    (k < 180 ? part_a : part_b).update(obs);
  }
  part_a.merge(part_b);
  CHECK(part_a.count == whole.count);
  for (int d = 0; d < 2; ++d) {
    CHECK(part_a.mean[static_cast<std::size_t>(d)] ==
          doctest::Approx(whole.mean[static_cast<std::size_t>(d)]).epsilon(1e-12));
    CHECK(part_a.m2[static_cast<std::size_t>(d)] ==
          doctest::Approx(whole.m2[static_cast<std::size_t>(d)]).epsilon(1e-10));
  }
  SUBCASE("merging an empty delta is a no-op") {
    RunningStats before = part_a;
    part_a.merge(RunningStats(2));
    CHECK(part_a.count == before.count);
    CHECK(part_a.mean == before.mean);
    CHECK(part_a.m2 == before.m2);
  }
}

TEST_CASE("normalize special cases") {
  SUBCASE("fresh stats pass observations through") {
    RunningStats stats(3);
    const double obs[] = {0.4, -2.0, 7.5};
    const std::vector<double> out = stats.normalize(obs);
    CHECK(out == std::vector<double>{0.4, -2.0, 7.5});
  }
  SUBCASE("constant stream divides by one") {
    RunningStats stats(1);
    for (int k = 0; k < 10; ++k) {
      const double x[] = {3.25};
      stats.update(x);
    }
    const double obs[] = {3.25};
    CHECK(stats.normalize(obs)[0] == 0.0);
    const double other[] = {4.25};
    CHECK(stats.normalize(other)[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("act maps raw outputs into the action box") {
  PolicyParams params;
  params.weights = Matrix(3, 7);
  params.action_low = -0.2;
  params.action_high = 0.0;

  SUBCASE("zero weights give the midpoint") {
    std::vector<double> obs(7, 1.0);
    for (double a : act(params, obs)) {
      CHECK(a == doctest::Approx(-0.1).epsilon(1e-15));
    }
  }
  SUBCASE("saturation reaches the box edges") {
    params.weights(0, 0) = 1e6;
    params.weights(1, 0) = -1e6;
    std::vector<double> obs(7, 0.0);
    obs[0] = 1.0;
    const std::vector<double> action = act(params, obs);
    CHECK(action[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(action[1] == doctest::Approx(-0.2).epsilon(1e-12));
  }
  SUBCASE("outputs stay inside the closed box for random weights") {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> noise(0.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
      for (double& w : params.weights.data) {
        w = noise(gen);
      }
      std::vector<double> obs(7);
      for (double& x : obs) {
        x = noise(gen);
      }
      for (double a : act(params, obs)) {
        CHECK(a >= params.action_low);
        CHECK(a <= params.action_high);
      }
    }
  }
  SUBCASE("dimension mismatch rejected") {
    std::vector<double> obs(6, 0.0);
    CHECK_THROWS_AS(act(params, obs), std::invalid_argument);
  }
}

TEST_CASE("perturb arithmetic") {
  PolicyParams params;
  params.weights = Matrix(1, 2);
  Matrix delta(1, 2);
  delta(0, 0) = 1.0;
  delta(0, 1) = 2.0;

  const PolicyParams plus = perturb(params, delta, 0.1, +1);
  CHECK(plus.weights(0, 0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(plus.weights(0, 1) == doctest::Approx(0.2).epsilon(1e-15));

  const PolicyParams minus = perturb(params, delta, 0.1, -1);
  CHECK(minus.weights(0, 0) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(minus.weights(0, 1) == doctest::Approx(-0.2).epsilon(1e-15));

  CHECK(params.weights(0, 0) == 0.0);  // original untouched
  CHECK_THROWS_AS(perturb(params, delta, 0.0, +1), std::invalid_argument);
  CHECK_THROWS_AS(perturb(params, delta, -0.5, +1), std::invalid_argument);
}

TEST_CASE("antithetic pairs are exactly symmetric around the base point") {
  // On a dyadic lattice every sum is exact, so any asymmetry in the pair
  // construction (separate draws, sign-dependent math) shows up as a hard
  // inequality.
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> lattice(-2048, 2048);
  PolicyParams params;
  params.weights = Matrix(3, 7);
  Matrix delta(3, 7);
  for (int trial = 0; trial < 50; ++trial) {
    for (double& w : params.weights.data) {
      w = lattice(gen) / 1024.0;
    }
    for (double& d : delta.data) {
      d = lattice(gen) / 1024.0;
    }
    const PolicyParams plus = perturb(params, delta, 0.25, +1);
    const PolicyParams minus = perturb(params, delta, 0.25, -1);
    for (std::size_t i = 0; i < params.weights.data.size(); ++i) {
      CHECK(plus.weights.data[i] + minus.weights.data[i] == 2.0 * params.weights.data[i]);
    }
  }
}

TEST_CASE("antithetic pairs cancel to one ulp for arbitrary weights") {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> noise(0.0, 1.0);
  PolicyParams params;
  params.weights = Matrix(3, 7);
  Matrix delta(3, 7);
  for (int trial = 0; trial < 50; ++trial) {
    for (double& w : params.weights.data) {
      w = noise(gen);
    }
    for (double& d : delta.data) {
      d = noise(gen);
    }
    const double scale = std::abs(noise(gen)) + 1e-3;
    const PolicyParams plus = perturb(params, delta, scale, +1);
    const PolicyParams minus = perturb(params, delta, scale, -1);
    for (std::size_t i = 0; i < params.weights.data.size(); ++i) {
      const double sum = plus.weights.data[i] + minus.weights.data[i];
      const double expected = 2.0 * params.weights.data[i];
      // each side carries at most half an ulp of its own magnitude
      const double bound = 2.0 * 2.23e-16 *
                           (std::abs(plus.weights.data[i]) + std::abs(minus.weights.data[i]) +
                            std::abs(expected));
      CHECK(std::abs(sum - expected) <= bound);
    }
  }
}

TEST_CASE("init_policy draws small deterministic weights") {
  const PolicyParams a = init_policy(3, 7, -0.2, 0.0, 1234);
  const PolicyParams b = init_policy(3, 7, -0.2, 0.0, 1234);
  CHECK(a.weights.data == b.weights.data);
  const PolicyParams c = init_policy(3, 7, -0.2, 0.0, 1235);
  CHECK(a.weights.data != c.weights.data);
  for (double w : a.weights.data) {
    CHECK(std::abs(w) < 0.1);  // 10 sigma
  }
}

}  // TEST_SUITE
