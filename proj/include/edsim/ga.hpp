#pragma once

#include <span>

#include "edsim/instance.hpp"
#include "edsim/objective.hpp"
#include "edsim/policies.hpp"
#include "edsim/rng.hpp"

namespace edsim {

struct GaParams {
  int population = 80;
  int elite = 20;
  int offspring = 50;
  int mutants = 10;
  double p_mut = 0.75;
  int generations = 200;
  double div_spread = 0.01;    // diversify when the dominant half varies less than this
  int div_stagnation = 50;     // ... and the best has not improved for this many generations
  void validate() const;       // elite + offspring + mutants == population
};

using RawWeights = std::array<double, kQueueClassCount>;

// Projects raw nonnegative weights onto the feasible set: strictly decreasing
// within each consultation type (within-type values sorted descending; exact
// ties separated by 1e-6 of the larger value) and rescaled to sum 10.
BetaWeights repair_weights(const RawWeights& raw);

// Per gene: Normal with mean at the parents' midpoint and standard deviation
// (a-b)^2/3; negatives clamp to zero before repair.
BetaWeights crossover(const BetaWeights& a, const BetaWeights& b, Rng& rng);

// Moves a U(0, 0.5) share of one uniformly chosen gene onto another; the
// total mass is conserved. Applied before repair.
void mutate_raw(RawWeights& raw, Rng& rng);

// With probability p_mut applies mutate_raw, then repairs.
BetaWeights mutate(const BetaWeights& w, double p_mut, Rng& rng);

BetaWeights random_individual(Rng& rng);

// Pooled objective of simulating every training instance under APQ(beta):
// warm-up filtered patients of all instances are aggregated into one data set
// and evaluated once.
double ga_fitness(const BetaWeights& beta, std::span<const Instance> instances,
                  const ScenarioConfig& sc, const ObjectiveWeights& w, int workers = 1);

struct GaGenerationInfo {
  int generation = 0;
  double best_fitness = 0;
  bool population_valid = false;  // every individual satisfies the constraints
  bool diversified = false;
};

struct GaResult {
  BetaWeights best;
  double best_fitness = 0;
  std::vector<GaGenerationInfo> history;
};

GaResult ga_run(std::span<const Instance> training, const ScenarioConfig& sc,
                const ObjectiveWeights& w, const GaParams& params, uint64_t seed, int workers = 1);

}  // namespace edsim
