// Serial vs OpenMP throughput on the three parallel kernels: instance
// simulation fan-out, race optimization, and forest training.

#include <chrono>
#include <cstdio>

#include "edsim/harness.hpp"
#include "edsim/parallel.hpp"

using namespace edsim;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class Fn>
void bench(const char* name, int workers_par, Fn&& fn) {
  fn(1);  // warm caches and allocators before timing
  Clock::time_point t0 = Clock::now();
  fn(1);
  double serial = seconds_since(t0);
  t0 = Clock::now();
  fn(workers_par);
  double parallel = seconds_since(t0);
  std::printf("%-24s serial %8.3fs   %2d workers %8.3fs   speedup %.2fx\n", name, serial,
              workers_par, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  int workers = argc > 1 ? std::atoi(argv[1]) : hardware_workers();
  std::printf("edsim benchmark, %d workers (serial reference = 1 worker)\n", workers);

  const ScenarioConfig sc = load_scenario("Base");
  const ObjectiveWeights w = load_objective("c15");

  std::vector<Instance> instances;
  for (int i = 0; i < 64; ++i) instances.push_back(sample_instance(sc, i, stream_seed(7, uint64_t(i))));

  bench("simulate 64 instances", workers, [&](int nw) {
    std::vector<double> obj(instances.size());
    parallel_for(int(instances.size()), nw, [&](int i) {
      Engine engine(sc);
      QpPolicy policy(1);
      Trace tr = engine.run(instances[size_t(i)], policy);
      obj[size_t(i)] = objective_eval(tr.patients, w, sc);
    });
  });

  SaParams sa;
  sa.iters1 = 500;
  sa.iters2 = 1000;
  sa.iters3 = 1500;
  bench("race on 1 instance", workers,
        [&](int nw) { race_optimize(instances[0], sc, w, sa, 42, nw); });

  // samples from a handful of optimized traces
  SampleSet samples;
  for (int i = 0; i < 8; ++i) {
    RaceResult r = race_optimize(instances[size_t(i)], sc, w, sa, 42, workers);
    samples.append(harvest_samples(r.trace, instances[size_t(i)], sc));
  }
  ForestParams fp;
  fp.n_trees = 64;
  bench("train 64-tree forest", workers, [&](int nw) { train_forest(samples, fp, 42, nw); });

  return 0;
}
