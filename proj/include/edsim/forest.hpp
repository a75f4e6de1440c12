#pragma once

#include <array>
#include <string>
#include <vector>

#include "edsim/features.hpp"
#include "edsim/rng.hpp"

namespace edsim {

struct ForestParams {
  int n_trees = 200;
  double subsample = 0.5;        // bootstrap sample fraction per tree
  int features_per_split = 10;   // ceil(sqrt(93))
  int max_depth = 24;
  int min_samples_leaf = 2;
};

// Internal node when left >= 0; otherwise a leaf carrying class counts.
struct TreeNode {
  int32_t feature = -1;
  float threshold = 0;  // x[feature] < threshold goes left
  int32_t left = -1, right = -1;
  std::array<uint32_t, kQueueClassCount> counts{};
};

struct Tree {
  std::vector<TreeNode> nodes;
  const TreeNode& leaf_for(const float* x) const;
};

// Bagged Gini decision trees over the 93-dim state features, 8 classes.
class Forest {
 public:
  int dim = kFeatureDim;
  int n_classes = kQueueClassCount;
  uint64_t seed = 0;
  size_t samples_per_tree = 0;  // ceil(subsample * N) at training time
  ForestParams params;
  std::vector<Tree> trees;

  // Mean of the per-tree leaf distributions; nonnegative, sums to 1.
  std::array<double, kQueueClassCount> predict_proba(const float* x) const;
  uint8_t predict(const float* x) const;
};

// Trains params.n_trees trees, each on its own bootstrap of
// ceil(subsample * N) samples drawn on tree-indexed RNG streams, so the
// result is deterministic for a seed and independent of worker count.
// Rejects single-class inputs.
Forest train_forest(const SampleSet& samples, const ForestParams& params, uint64_t seed,
                    int workers = 1);

std::string forest_to_text(const Forest& f);
Forest forest_from_text(const std::string& text);
void save_forest(const Forest& f, const std::string& path);
Forest load_forest(const std::string& path);

}  // namespace edsim
