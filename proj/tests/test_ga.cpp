#include <cmath>
#include <numeric>

#include "doctest.h"
#include "edsim/engine.hpp"
#include "edsim/ga.hpp"

using namespace edsim;

TEST_CASE("repair_weights") {
  SUBCASE("a valid vector summing to 20 is purely rescaled") {
    RawWeights raw = {12, 4, 2, 1, 0.6, 0.3, 0.08, 0.02};
    BetaWeights b = repair_weights(raw);
    for (int i = 0; i < 8; ++i) CHECK(b.beta[size_t(i)] == doctest::Approx(raw[size_t(i)] / 2).epsilon(1e-12));
    CHECK(b.valid());
  }

  SUBCASE("monotonicity violations are projected out") {
    RawWeights raw = {0.5, 1.0, 0.2, 0.1, 4, 3, 2, 1};  // beta_{2,1} < beta_{3,1}
    BetaWeights b = repair_weights(raw);
    CHECK(b.valid());
    CHECK(b.at(2, Consult::First) > b.at(3, Consult::First));
  }

  SUBCASE("exact ties separate") {
    RawWeights raw = {5, 5, 0, 0, 1, 1, 1, 1};
    BetaWeights b = repair_weights(raw);
    std::string why;
    CHECK_MESSAGE(b.valid(&why), why);
  }

  SUBCASE("all-zero input rejected") {
    RawWeights raw{};
    CHECK_THROWS(repair_weights(raw));
  }

  SUBCASE("sum and monotonicity invariants hold for random raws") {
    Rng rng(1);
    for (int rep = 0; rep < 2000; ++rep) {
      RawWeights raw;
      for (double& x : raw) x = rng.next_double() < 0.2 ? 0.0 : rng.next_double() * 5.0;
      if (std::accumulate(raw.begin(), raw.end(), 0.0) <= 0) continue;
      BetaWeights b = repair_weights(raw);
      CHECK(std::abs(b.sum() - 10.0) < 1e-9);
      std::string why;
      CHECK_MESSAGE(b.valid(&why), why);
    }
  }
}

TEST_CASE("crossover") {
  Rng rng(2);

  SUBCASE("identical parents reproduce the parent") {
    BetaWeights p = repair_weights({6, 2, 1, 0.5, 0.3, 0.1, 0.07, 0.03});
    BetaWeights child = crossover(p, p, rng);
    for (int i = 0; i < 8; ++i)
      CHECK(child.beta[size_t(i)] == doctest::Approx(p.beta[size_t(i)]).epsilon(1e-12));
  }

  SUBCASE("child genes centered at the parent midpoint") {
    BetaWeights a = repair_weights({6, 2, 1, 0.5, 0.3, 0.1, 0.07, 0.03});
    BetaWeights bw = repair_weights({5, 2.5, 1.2, 0.6, 0.4, 0.2, 0.08, 0.02});
    const int n = 10000;
    // raw gene draw (before repair rescaling) via the published recipe:
    // Normal(midpoint, (a-b)^2/3); test gene 0 against a Monte Carlo mean
    double sum = 0;
    double mid = 0.5 * (a.beta[0] + bw.beta[0]);
    double sigma = (a.beta[0] - bw.beta[0]) * (a.beta[0] - bw.beta[0]) / 3.0;
    for (int i = 0; i < n; ++i) sum += std::max(mid + sigma * rng.normal(), 0.0);
    CHECK(std::abs(sum / n - mid) < 3 * sigma / std::sqrt(double(n)) + 1e-6);
  }

  SUBCASE("children always satisfy the constraints") {
    Rng r2(3);
    BetaWeights a = repair_weights({6, 2, 1, 0.5, 0.3, 0.1, 0.07, 0.03});
    BetaWeights bw = repair_weights({1, 0.9, 0.8, 0.7, 3, 2, 1, 0.6});
    for (int rep = 0; rep < 500; ++rep) {
      BetaWeights child = crossover(a, bw, r2);
      CHECK(std::abs(child.sum() - 10.0) < 1e-9);
      CHECK(child.valid());
    }
  }
}

TEST_CASE("mutate") {
  SUBCASE("probability zero is the identity") {
    Rng rng(4);
    BetaWeights p = repair_weights({6, 2, 1, 0.5, 0.3, 0.1, 0.07, 0.03});
    BetaWeights m = mutate(p, 0.0, rng);
    for (int i = 0; i < 8; ++i) CHECK(m.beta[size_t(i)] == p.beta[size_t(i)]);
  }

  SUBCASE("the raw shift conserves mass and moves at most half the source") {
    Rng rng(5);
    for (int rep = 0; rep < 2000; ++rep) {
      RawWeights before = {6, 2, 1, 0.5, 0.3, 0.1, 0.07, 0.03};
      RawWeights after = before;
      mutate_raw(after, rng);
      double sum_before = std::accumulate(before.begin(), before.end(), 0.0);
      double sum_after = std::accumulate(after.begin(), after.end(), 0.0);
      CHECK(sum_after == doctest::Approx(sum_before).epsilon(1e-12));
      for (int i = 0; i < 8; ++i) {
        CHECK(after[size_t(i)] >= 0.5 * before[size_t(i)] - 1e-12);  // at most 50% leaves
        CHECK(after[size_t(i)] >= 0);
      }
    }
  }

  SUBCASE("mutated individuals stay valid") {
    Rng rng(15);
    BetaWeights p = repair_weights({6, 2, 1, 0.5, 0.3, 0.1, 0.07, 0.03});
    for (int rep = 0; rep < 500; ++rep) {
      BetaWeights m = mutate(p, 1.0, rng);
      CHECK(std::abs(m.sum() - 10.0) < 1e-9);
      CHECK(m.valid());
    }
  }
}

TEST_CASE("random individuals satisfy the constraints") {
  Rng rng(6);
  for (int rep = 0; rep < 500; ++rep) {
    BetaWeights b = random_individual(rng);
    CHECK(std::abs(b.sum() - 10.0) < 1e-9);
    CHECK(b.valid());
  }
}

namespace {

std::vector<Instance> tiny_training_set(const ScenarioConfig& sc, int n) {
  std::vector<Instance> v;
  for (int i = 0; i < n; ++i) v.push_back(sample_instance(sc, i, stream_seed(700, uint64_t(i))));
  return v;
}

}  // namespace

TEST_CASE("ga_fitness equals the pooled objective of APQ simulation") {
  const ScenarioConfig sc = load_scenario("Base");
  const ObjectiveWeights w = load_objective("c15");
  auto instances = tiny_training_set(sc, 2);
  BetaWeights b = repair_weights({6.7, 2.4, 0.52, 0.19, 0.04, 0.03, 0.02, 0.01});

  double fitness = ga_fitness(b, instances, sc, w, 1);
  CHECK(fitness == ga_fitness(b, instances, sc, w, 1));  // deterministic

  // cross-check against a direct engine run with the APQ policy
  std::vector<Patient> pool;
  for (const Instance& inst : instances) {
    Engine engine(sc);
    ApqPolicy policy(b);
    Trace tr = engine.run(inst, policy);
    auto kept = warmup_filter(tr.patients, sc);
    pool.insert(pool.end(), kept.begin(), kept.end());
  }
  CHECK(fitness == objective_eval(pool, w, sc));

  // single instance: fitness is that instance's filtered objective
  std::vector<Instance> one{instances[0]};
  Engine engine(sc);
  ApqPolicy policy(b);
  Trace tr = engine.run(one[0], policy);
  CHECK(ga_fitness(b, one, sc, w, 1) ==
        objective_eval(warmup_filter(tr.patients, sc), w, sc));
}

TEST_CASE("pooling differs from averaging per-instance objectives") {
  // two one-patient instances of different grades: the pooled estimator keeps each
  // grade's mean separate, while averaging the two per-instance objectives
  // would halve both terms
  const ScenarioConfig sc = load_scenario("Base");
  const ObjectiveWeights w = load_objective("c15");
  auto patient = [&](int grade, double wait) {
    Patient p;
    p.id = 0;
    p.grade = grade;
    p.arrival = 500;
    p.t_sw3 = 500;
    p.w1 = 0;
    p.w2 = 0;
    p.w3 = wait;
    p.t_first = 500 + wait;
    p.t_leave = 600 + wait;
    return p;
  };
  std::vector<Patient> a{patient(2, 10)}, b{patient(5, 200)};
  std::vector<Patient> pool;
  pool.insert(pool.end(), a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());
  double pooled = objective_eval(pool, w, sc);
  double averaged = 0.5 * (objective_eval(a, w, sc) + objective_eval(b, w, sc));
  CHECK(pooled != doctest::Approx(averaged).epsilon(1e-6));
}

TEST_CASE("ga_run on a tiny configuration") {
  const ScenarioConfig sc = load_scenario("Base");
  const ObjectiveWeights w = load_objective("c15");
  auto instances = tiny_training_set(sc, 2);

  GaParams params;
  params.population = 12;
  params.elite = 4;
  params.offspring = 6;
  params.mutants = 2;
  params.generations = 5;
  params.div_stagnation = 3;

  GaResult res = ga_run(instances, sc, w, params, 42, 1);
  REQUIRE(res.history.size() == 5);
  double prev = res.history[0].best_fitness;
  for (const GaGenerationInfo& g : res.history) {
    CHECK(g.population_valid);
    CHECK(g.best_fitness <= prev + 1e-12);
    prev = g.best_fitness;
  }
  CHECK(res.best.valid());
  CHECK(res.best_fitness == ga_fitness(res.best, instances, sc, w, 1));

  // determinism
  GaResult res2 = ga_run(instances, sc, w, params, 42, 1);
  CHECK(res2.best_fitness == res.best_fitness);

  GaParams bad = params;
  bad.mutants = 3;
  CHECK_THROWS(ga_run(instances, sc, w, bad, 42, 1));
}

TEST_CASE("ga defaults follow the published parameterization") {
  GaParams p;
  CHECK(p.population == 80);
  CHECK(p.elite == 20);
  CHECK(p.offspring == 50);
  CHECK(p.mutants == 10);
  CHECK(p.p_mut == 0.75);
  CHECK(p.generations == 200);
  CHECK(p.div_stagnation == 50);
}
