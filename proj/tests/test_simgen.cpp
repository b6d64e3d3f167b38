#include <doctest.h>

#include <cmath>

#include "anchormc/simgen.hpp"
#include "oracles.hpp"

using namespace anchormc;

TEST_CASE("sim1 cluster means match the construction at large n") {
  const Sim1Truth sim = gen_sim1(40000, 11);
  Eigen::MatrixXd expected(4, 4);
  expected << -1, 1, -1, 1,
               1, -1, 1, -1,
              -1, -1, 1, 1,
               1, 1, -1, -1;
  const int per = 10000;
  for (int k = 0; k < 4; ++k) {
    const Eigen::VectorXd mean =
        sim.data.y.middleRows(k * per, per).colwise().mean();
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(mean[j] - expected(k, j)) < 0.02);  // 3 sd CLT bound
    }
  }
  sim.truth.validate();
  CHECK(sim.truth.kind == SubsetKind::Partition);
}

TEST_CASE("sim1 rejects n not divisible by four and is seed deterministic") {
  CHECK_THROWS_AS(gen_sim1(10, 1), std::invalid_argument);
  const Sim1Truth a = gen_sim1(40, 5);
  const Sim1Truth b = gen_sim1(40, 5);
  CHECK(a.data.y == b.data.y);
  CHECK(a.data.ids == b.data.ids);
}

TEST_CASE("sim2 simplex, count bounds and background rows") {
  const Sim2Truth sim = gen_sim2(13);
  CHECK(sim.data.n() == 800);
  CHECK(sim.data.p() == 5);
  for (int j = 0; j < 5; ++j) {
    double total = sim.b[j];
    for (const SubsetParams& p : sim.params) {
      total += std::get<FaSubsetParams>(p).theta[j];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int i = 0; i < 800; ++i) {
    for (int j = 0; j < 5; ++j) {
      CHECK(sim.data.y(i, j) >= 0);
      CHECK(sim.data.y(i, j) <= 50);
    }
  }
  // Rows 601..800 carry no feature: mean y/N estimates b_j p0.
  for (int j = 0; j < 5; ++j) {
    double mean = 0.0;
    for (int i = 600; i < 800; ++i) mean += sim.data.y(i, j);
    mean /= 200.0 * 50.0;
    const double expected = sim.b[j] * sim.p0;
    const double se = std::sqrt(expected * (1 - expected) / (200.0 * 50.0));
    CHECK(std::abs(mean - expected) < 3.0 * se + 1e-6);
  }
  sim.truth.validate();
}

TEST_CASE("sim3 produces trinary data and records the realized truth") {
  const Sim3Truth sim = gen_sim3(200, 8, 1.0, 17);
  for (int i = 0; i < sim.data.n(); ++i) {
    for (int j = 0; j < sim.data.p(); ++j) {
      CHECK(sim.data.y(i, j) >= -1);
      CHECK(sim.data.y(i, j) <= 1);
    }
  }
  CHECK(static_cast<int>(sim.params.size()) == sim.truth.K);
  sim.truth.validate();
  const Sim3Truth again = gen_sim3(200, 8, 1.0, 17);
  CHECK(again.data.y == sim.data.y);
}

TEST_CASE("buffet prior sample has E[K] = m H_n") {
  for (const auto& [n, m] : std::vector<std::pair<int, double>>{
           {50, 1.0}, {200, 1.0}, {100, 2.0}}) {
    CAPTURE(n);
    CAPTURE(m);
    const int draws = 10000;
    double sum = 0.0, sum_sq = 0.0;
    for (int d = 0; d < draws; ++d) {
      const AllocationMatrix a = ibp_prior_sample(n, m, 1000 + d);
      sum += a.K;
      sum_sq += static_cast<double>(a.K) * a.K;
    }
    const double mean = sum / draws;
    const double sd = std::sqrt(sum_sq / draws - mean * mean);
    const double expected = m * oracles::harmonic(n);
    INFO("mean ", mean, " expected ", expected);
    CHECK(std::abs(mean - expected) < 3.0 * sd / std::sqrt(draws));
  }
}

TEST_CASE("buffet prior at n=1 is Poisson(m)") {
  const int draws = 20000;
  int zeros = 0;
  for (int d = 0; d < draws; ++d) {
    zeros += ibp_prior_sample(1, 1.0, 5000 + d).K == 0 ? 1 : 0;
  }
  const double p_zero = static_cast<double>(zeros) / draws;
  const double expected = std::exp(-1.0);
  const double se = std::sqrt(expected * (1 - expected) / draws);
  CHECK(std::abs(p_zero - expected) < 3.0 * se);

  const AllocationMatrix a = ibp_prior_sample(30, 1.0, 4);
  const AllocationMatrix b = ibp_prior_sample(30, 1.0, 4);
  CHECK(a.entries == b.entries);  // seed determinism
}

TEST_CASE("sim3 feature count tracks the harmonic mean at n=1000") {
  const int reps = 1500;
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const AllocationMatrix a = ibp_prior_sample(1000, 1.0, 9000 + r);
    sum += a.K;
    sum_sq += static_cast<double>(a.K) * a.K;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt(sum_sq / reps - mean * mean);
  const double expected = oracles::harmonic(1000);  // about 7.49
  INFO("mean ", mean, " expected ", expected);
  CHECK(std::abs(mean - expected) < 3.0 * sd / std::sqrt(reps));
}
