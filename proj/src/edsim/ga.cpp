#include "edsim/ga.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "edsim/engine.hpp"
#include "edsim/parallel.hpp"

namespace edsim {

void GaParams::validate() const {
  if (elite + offspring + mutants != population)
    throw std::invalid_argument("ga: elite + offspring + mutants must equal population");
  if (elite < 1 || offspring < 0 || mutants < 0 || population < 2)
    throw std::invalid_argument("ga: bad population split");
  if (p_mut < 0 || p_mut > 1) throw std::invalid_argument("ga: p_mut out of range");
  if (generations < 1) throw std::invalid_argument("ga: generations must be >= 1");
}

BetaWeights repair_weights(const RawWeights& raw) {
  RawWeights v = raw;
  double total = 0;
  for (double& x : v) {
    if (x < 0) x = 0;
    total += x;
  }
  if (total <= 0) throw std::invalid_argument("repair_weights: all-zero weight vector");

  for (int type = 0; type < 2; ++type) {
    double* w = v.data() + 4 * type;
    std::sort(w, w + 4, std::greater<>());
    // separate exact ties bottom-up; the floor keeps all-zero tails strict
    for (int i = 2; i >= 0; --i)
      if (w[i] <= w[i + 1]) {
        double eps = std::max(1e-6 * w[i + 1], 1e-12 * (1.0 + total));
        w[i] = w[i + 1] + eps;
      }
  }

  double sum = std::accumulate(v.begin(), v.end(), 0.0);
  BetaWeights b;
  for (int i = 0; i < kQueueClassCount; ++i) b.beta[size_t(i)] = v[size_t(i)] * (10.0 / sum);
  return b;
}

BetaWeights crossover(const BetaWeights& a, const BetaWeights& b, Rng& rng) {
  RawWeights child;
  for (int g = 0; g < kQueueClassCount; ++g) {
    double mid = 0.5 * (a.beta[size_t(g)] + b.beta[size_t(g)]);
    double dist = a.beta[size_t(g)] - b.beta[size_t(g)];
    double sigma = dist * dist / 3.0;
    child[size_t(g)] = std::max(mid + sigma * rng.normal(), 0.0);
  }
  return repair_weights(child);
}

void mutate_raw(RawWeights& raw, Rng& rng) {
  int i = int(rng.below(kQueueClassCount));
  int j = int(rng.below(kQueueClassCount - 1));
  if (j >= i) ++j;
  double share = rng.next_double() * 0.5;
  double moved = share * raw[size_t(i)];
  raw[size_t(i)] -= moved;
  raw[size_t(j)] += moved;
}

BetaWeights mutate(const BetaWeights& w, double p_mut, Rng& rng) {
  if (rng.next_double() >= p_mut) return w;
  RawWeights raw = w.beta;
  mutate_raw(raw, rng);
  return repair_weights(raw);
}

BetaWeights random_individual(Rng& rng) {
  // log-uniform magnitudes over three decades; uniform draws almost never
  // cover the steep weight ratios that good accumulation rates need
  RawWeights raw;
  for (double& x : raw) x = std::pow(10.0, rng.uniform(-2.0, 1.0));
  return repair_weights(raw);
}

double ga_fitness(const BetaWeights& beta, std::span<const Instance> instances,
                  const ScenarioConfig& sc, const ObjectiveWeights& w, int workers) {
  std::vector<std::vector<Patient>> per_instance(instances.size());
  parallel_for(int(instances.size()), workers, [&](int i) {
    Engine engine(sc);
    ApqPolicy policy(beta);
    Trace tr = engine.run(instances[size_t(i)], policy);
    per_instance[size_t(i)] = warmup_filter(tr.patients, sc);
  });
  std::vector<Patient> pool;
  for (auto& v : per_instance) pool.insert(pool.end(), v.begin(), v.end());
  return objective_eval(pool, w, sc);
}

GaResult ga_run(std::span<const Instance> training, const ScenarioConfig& sc,
                const ObjectiveWeights& w, const GaParams& params, uint64_t seed, int workers) {
  params.validate();
  Rng rng(seed);

  struct Individual {
    BetaWeights beta;
    double fitness = 0;
  };
  std::vector<Individual> pop(size_t(params.population));
  for (auto& ind : pop) ind.beta = random_individual(rng);

  auto evaluate = [&](std::vector<Individual>& v, size_t from) {
    // fan out over individuals; each evaluation simulates all instances
    std::vector<double> fit(v.size() - from);
    parallel_for(int(v.size() - from), workers, [&](int i) {
      fit[size_t(i)] = ga_fitness(v[from + size_t(i)].beta, training, sc, w, 1);
    });
    for (size_t i = from; i < v.size(); ++i) v[i].fitness = fit[i - from];
  };
  auto by_fitness = [](const Individual& a, const Individual& b) {
    return a.fitness < b.fitness;
  };

  evaluate(pop, 0);
  std::stable_sort(pop.begin(), pop.end(), by_fitness);

  GaResult out;
  out.best = pop[0].beta;
  out.best_fitness = pop[0].fitness;
  int last_improvement = 0;

  for (int gen = 1; gen <= params.generations; ++gen) {
    std::vector<Individual> next(pop.begin(), pop.begin() + params.elite);
    next.reserve(size_t(params.population));
    for (int i = 0; i < params.offspring; ++i) {
      const Individual& pa = pop[size_t(rng.below(uint64_t(params.elite)))];
      const Individual& pb = pop[size_t(params.elite) +
                                 size_t(rng.below(uint64_t(params.population - params.elite)))];
      Individual child;
      child.beta = mutate(crossover(pa.beta, pb.beta, rng), params.p_mut, rng);
      next.push_back(child);
    }
    for (int i = 0; i < params.mutants; ++i)
      next.push_back(Individual{random_individual(rng), 0});

    evaluate(next, size_t(params.elite));
    std::stable_sort(next.begin(), next.end(), by_fitness);
    pop = std::move(next);

    if (pop[0].fitness < out.best_fitness) {
      out.best_fitness = pop[0].fitness;
      out.best = pop[0].beta;
      last_improvement = gen;
    }

    GaGenerationInfo info;
    info.generation = gen;
    info.best_fitness = out.best_fitness;
    info.population_valid = true;
    for (const Individual& ind : pop)
      if (!ind.beta.valid()) info.population_valid = false;

    // diversification: dominant half nearly uniform in fitness and no recent
    // improvement -> regenerate all non-elite individuals
    double half_lo = pop[0].fitness;
    double half_hi = pop[size_t(params.population / 2 - 1)].fitness;
    bool flat = half_lo > 0 && (half_hi - half_lo) / half_lo < params.div_spread;
    if (flat && gen - last_improvement >= params.div_stagnation) {
      for (size_t i = size_t(params.elite); i < pop.size(); ++i)
        pop[i].beta = random_individual(rng);
      evaluate(pop, size_t(params.elite));
      std::stable_sort(pop.begin(), pop.end(), by_fitness);
      last_improvement = gen;
      info.diversified = true;
    }

    out.history.push_back(info);
  }
  return out;
}

}  // namespace edsim
