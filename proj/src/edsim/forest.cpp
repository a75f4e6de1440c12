#include "edsim/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "edsim/parallel.hpp"
#include "edsim/textio.hpp"

namespace edsim {

const TreeNode& Tree::leaf_for(const float* x) const {
  const TreeNode* n = &nodes[0];
  while (n->left >= 0)
    n = &nodes[size_t(x[n->feature] < n->threshold ? n->left : n->right)];
  return *n;
}

std::array<double, kQueueClassCount> Forest::predict_proba(const float* x) const {
  std::array<double, kQueueClassCount> probs{};
  for (const Tree& t : trees) {
    const TreeNode& leaf = t.leaf_for(x);
    double total = 0;
    for (uint32_t c : leaf.counts) total += c;
    for (int k = 0; k < kQueueClassCount; ++k) probs[size_t(k)] += leaf.counts[size_t(k)] / total;
  }
  for (double& p : probs) p /= double(trees.size());
  return probs;
}

uint8_t Forest::predict(const float* x) const {
  auto p = predict_proba(x);
  return uint8_t(std::max_element(p.begin(), p.end()) - p.begin());
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const SampleSet& data, const ForestParams& p, uint64_t seed)
      : data_(&data), p_(&p), rng_(seed), feature_perm_(size_t(data.dim)) {
    std::iota(feature_perm_.begin(), feature_perm_.end(), 0);
  }

  Tree build(size_t n_bootstrap) {
    idx_.resize(n_bootstrap);
    for (uint32_t& i : idx_) i = uint32_t(rng_.below(data_->size()));
    tree_.nodes.clear();
    grow(0, n_bootstrap, 0);
    return std::move(tree_);
  }

 private:
  std::array<uint32_t, kQueueClassCount> histogram(size_t begin, size_t end) const {
    std::array<uint32_t, kQueueClassCount> h{};
    for (size_t i = begin; i < end; ++i) ++h[size_t(data_->labels[idx_[i]])];
    return h;
  }

  int make_leaf(const std::array<uint32_t, kQueueClassCount>& counts) {
    TreeNode n;
    n.counts = counts;
    tree_.nodes.push_back(n);
    return int(tree_.nodes.size()) - 1;
  }

  // Greedy Gini split over a fresh random feature subset; -1 when no valid
  // split exists (constant features or the leaf-size floor).
  bool best_split(size_t begin, size_t end, int* feature, float* threshold) {
    const size_t n = end - begin;
    const int min_leaf = p_->min_samples_leaf;
    double best_score = -1;
    // draw features_per_split distinct features
    int k = std::min(p_->features_per_split, data_->dim);
    for (int i = 0; i < k; ++i) {
      int j = i + int(rng_.below(uint64_t(data_->dim - i)));
      std::swap(feature_perm_[size_t(i)], feature_perm_[size_t(j)]);
    }
    for (int fi = 0; fi < k; ++fi) {
      int f = feature_perm_[size_t(fi)];
      sorted_.clear();
      for (size_t i = begin; i < end; ++i) {
        uint32_t s = idx_[i];
        sorted_.push_back({data_->features[size_t(s) * size_t(data_->dim) + size_t(f)],
                           data_->labels[s]});
      }
      std::sort(sorted_.begin(), sorted_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (sorted_.front().first == sorted_.back().first) continue;

      std::array<int64_t, kQueueClassCount> left{}, right{};
      for (const auto& [v, c] : sorted_) ++right[size_t(c)];
      double sumsq_l = 0, sumsq_r = 0;
      for (int64_t c : right) sumsq_r += double(c) * double(c);
      for (size_t i = 0; i + 1 < n; ++i) {
        int c = sorted_[i].second;
        sumsq_l += 2.0 * double(left[size_t(c)]) + 1.0;
        sumsq_r -= 2.0 * double(right[size_t(c)]) - 1.0;
        ++left[size_t(c)];
        --right[size_t(c)];
        size_t nl = i + 1, nr = n - nl;
        if (sorted_[i].first == sorted_[i + 1].first) continue;  // not a boundary
        if (nl < size_t(min_leaf) || nr < size_t(min_leaf)) continue;
        // maximizing sum of squared class shares weighted by child size
        // is equivalent to minimizing the weighted Gini impurity
        double score = sumsq_l / double(nl) + sumsq_r / double(nr);
        if (score > best_score) {
          best_score = score;
          *feature = f;
          float lo = sorted_[i].first, hi = sorted_[i + 1].first;
          float mid = lo + (hi - lo) * 0.5f;
          *threshold = (mid > lo && mid <= hi) ? mid : hi;
        }
      }
    }
    return best_score >= 0;
  }

  int grow(size_t begin, size_t end, int depth) {
    auto counts = histogram(begin, end);
    int present = 0;
    for (uint32_t c : counts) present += c > 0;
    if (present <= 1 || depth >= p_->max_depth || end - begin < 2 * size_t(p_->min_samples_leaf))
      return make_leaf(counts);

    int feature = -1;
    float threshold = 0;
    if (!best_split(begin, end, &feature, &threshold)) return make_leaf(counts);

    auto mid_it = std::partition(idx_.begin() + std::ptrdiff_t(begin),
                                 idx_.begin() + std::ptrdiff_t(end), [&](uint32_t s) {
                                   return data_->features[size_t(s) * size_t(data_->dim) +
                                                          size_t(feature)] < threshold;
                                 });
    size_t mid = size_t(mid_it - idx_.begin());
    if (mid == begin || mid == end) return make_leaf(counts);

    TreeNode node;
    node.feature = feature;
    node.threshold = threshold;
    tree_.nodes.push_back(node);
    int self = int(tree_.nodes.size()) - 1;
    int left = grow(begin, mid, depth + 1);
    int right = grow(mid, end, depth + 1);
    tree_.nodes[size_t(self)].left = left;
    tree_.nodes[size_t(self)].right = right;
    return self;
  }

  const SampleSet* data_;
  const ForestParams* p_;
  Rng rng_;
  Tree tree_;
  std::vector<uint32_t> idx_;
  std::vector<int> feature_perm_;
  std::vector<std::pair<float, uint8_t>> sorted_;
};

}  // namespace

Forest train_forest(const SampleSet& samples, const ForestParams& params, uint64_t seed,
                    int workers) {
  if (samples.size() == 0) throw std::invalid_argument("train_forest: empty sample set");
  {
    std::array<bool, kQueueClassCount> seen{};
    for (uint8_t l : samples.labels) seen[size_t(l)] = true;
    int classes = 0;
    for (bool b : seen) classes += b;
    if (classes < 2) throw std::invalid_argument("train_forest: need at least two classes");
  }

  Forest f;
  f.dim = samples.dim;
  f.seed = seed;
  f.params = params;
  f.samples_per_tree = size_t(std::ceil(params.subsample * double(samples.size())));
  f.trees.resize(size_t(params.n_trees));
  parallel_for(params.n_trees, workers, [&](int t) {
    TreeBuilder builder(samples, params, stream_seed(seed, uint64_t(t)));
    f.trees[size_t(t)] = builder.build(f.samples_per_tree);
  });
  return f;
}

std::string forest_to_text(const Forest& f) {
  std::ostringstream os;
  os << "# edsim-forest v1\n";
  os << "dim " << f.dim << "\nclasses " << f.n_classes << "\ntrees " << f.trees.size()
     << "\nseed " << f.seed << "\nsamples_per_tree " << f.samples_per_tree << '\n';
  os << "params " << f.params.n_trees << ' ' << format_double_exact(f.params.subsample) << ' '
     << f.params.features_per_split << ' ' << f.params.max_depth << ' '
     << f.params.min_samples_leaf << '\n';
  char buf[32];
  for (size_t t = 0; t < f.trees.size(); ++t) {
    const Tree& tree = f.trees[t];
    os << "tree " << t << ' ' << tree.nodes.size() << '\n';
    for (size_t i = 0; i < tree.nodes.size(); ++i) {
      const TreeNode& n = tree.nodes[i];
      if (n.left >= 0) {
        std::snprintf(buf, sizeof(buf), "%.9g", double(n.threshold));
        os << i << " n " << n.feature << ' ' << buf << ' ' << n.left << ' ' << n.right << '\n';
      } else {
        os << i << " l";
        for (uint32_t c : n.counts) os << ' ' << c;
        os << '\n';
      }
    }
  }
  return os.str();
}

Forest forest_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "# edsim-forest v1")
    throw std::runtime_error("not an edsim forest file");
  Forest f;
  size_t n_trees = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dim") ls >> f.dim;
    else if (key == "classes") ls >> f.n_classes;
    else if (key == "trees") { ls >> n_trees; f.trees.reserve(n_trees); }
    else if (key == "seed") ls >> f.seed;
    else if (key == "samples_per_tree") ls >> f.samples_per_tree;
    else if (key == "params")
      ls >> f.params.n_trees >> f.params.subsample >> f.params.features_per_split >>
          f.params.max_depth >> f.params.min_samples_leaf;
    else if (key == "tree") {
      size_t id = 0, n_nodes = 0;
      ls >> id >> n_nodes;
      Tree tree;
      tree.nodes.reserve(n_nodes);
      for (size_t i = 0; i < n_nodes; ++i) {
        if (!std::getline(is, line)) throw std::runtime_error("forest file truncated");
        std::istringstream ns(line);
        size_t index = 0;
        char tag;
        ns >> index >> tag;
        if (index != i) throw std::runtime_error("bad forest node index: " + line);
        TreeNode node;
        if (tag == 'n') ns >> node.feature >> node.threshold >> node.left >> node.right;
        else if (tag == 'l') for (uint32_t& c : node.counts) ns >> c;
        else throw std::runtime_error("bad forest node line: " + line);
        if (!ns) throw std::runtime_error("bad forest node line: " + line);
        tree.nodes.push_back(node);
      }
      f.trees.push_back(std::move(tree));
    } else {
      throw std::runtime_error("unknown forest key: " + key);
    }
  }
  if (f.trees.size() != n_trees) throw std::runtime_error("forest tree count mismatch");
  return f;
}

void save_forest(const Forest& f, const std::string& path) { atomic_write(path, forest_to_text(f)); }

Forest load_forest(const std::string& path) { return forest_from_text(read_file(path)); }

}  // namespace edsim
