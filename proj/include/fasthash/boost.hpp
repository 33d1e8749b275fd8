#pragma once

// Hash-function learners for one bit: boosted decision trees over quantized
// features and a linear hinge-loss perceptron over raw features.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "fasthash/core.hpp"

namespace fasthash {

// Sends bins <= threshold_bin to `polarity` and the rest to -polarity.
struct Stump {
  std::uint32_t dim = 0;
  std::uint8_t threshold_bin = 0;  // in [0, 254]
  std::int8_t polarity = 1;

  int predict(std::span<const std::uint8_t> bins) const {
    return bins[dim] <= threshold_bin ? polarity : -polarity;
  }
  bool operator==(const Stump&) const = default;
};

inline constexpr int kNumCuts = kNumBins - 1;

struct StumpFit {
  Stump stump;
  double weighted_error = 0.0;  // fraction of total weight misclassified
};

// Best (dim, cut, polarity) over `dims` x 255 cuts by weighted 0/1 error.
// Ties go to the lowest dim, then the lowest cut, then polarity +1.
// `subset` restricts the examples considered; empty means all rows.
StumpFit train_stump(const QuantizedFeatures& q, std::span<const std::int8_t> labels,
                     std::span<const double> weights, std::span<const std::uint32_t> dims,
                     std::span<const std::uint32_t> subset = {});

// Complete binary tree in heap order: node k has children 2k+1 (bin <= cut)
// and 2k+2. Nodes below a leaf are unused.
struct TreeNode {
  bool leaf = true;
  std::int8_t output = 1;
  Stump split;
  bool operator==(const TreeNode&) const = default;
};

class Tree {
 public:
  Tree() = default;
  Tree(int depth, std::vector<TreeNode> nodes);

  static Tree leaf(int output);

  int depth() const noexcept { return depth_; }
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  int evaluate(std::span<const std::uint8_t> bins) const;

  bool operator==(const Tree&) const = default;

 private:
  int depth_ = 0;
  std::vector<TreeNode> nodes_{TreeNode{}};
};

struct TreeOptions {
  int max_depth = 4;
  // Dimensions evaluated per node split; 0 or >= d means all.
  std::size_t dims_per_split = 0;
  std::uint64_t seed = 0;
};

// Greedy top-down growth; every internal node is the best stump on its
// partition. A node becomes a leaf at max depth, when pure, or when the best
// stump leaves one side with no weight. Leaves output the sign of their
// weighted label sum (ties +1).
Tree train_tree(const QuantizedFeatures& q, std::span<const std::int8_t> labels,
                std::span<const double> weights, const TreeOptions& options);

// sign(sum_q w_q T_q(x)), sign(0) = +1.
struct BoostedHash {
  std::uint32_t dimension = 0;
  std::vector<Tree> trees;
  std::vector<double> weights;

  int evaluate(std::span<const std::uint8_t> bins) const;
  double score(std::span<const std::uint8_t> bins) const;
  bool operator==(const BoostedHash&) const = default;
};

struct BoostOptions {
  int rounds = 200;
  int max_depth = 4;
  double trim_fraction = 0.10;
  double lazy_fraction = 0.20;
  std::uint64_t seed = 0;
};

struct BoostReport {
  int rounds_run = 0;
  int trees_kept = 0;
  double training_error = 0.0;
  bool degenerate_targets = false;
  bool stopped_weak = false;     // a round reached error >= 0.5
  bool stopped_perfect = false;  // a round reached error 0
  // Normalized exponential loss (1/n) sum exp(-z F(x)) after each kept tree.
  std::vector<double> exp_loss;
  // Weighted error of each kept tree under the pre-round distribution.
  std::vector<double> round_error;
};

inline constexpr double kMinBoostError = 1e-10;

// Discrete AdaBoost. Each round zeroes the trim_fraction smallest weights for
// tree fitting only, samples ceil(lazy_fraction * d) dimensions per split,
// and measures the tree's error eps on the full weight distribution.
// alpha = 1/2 ln((1 - eps) / eps); eps = 0 is clamped to kMinBoostError and
// ends training; eps >= 0.5 drops the tree and ends training (the first tree
// is kept with weight 1 so the model is never empty).
BoostedHash train_boosted_hash(const QuantizedFeatures& q, std::span<const std::int8_t> targets,
                               const BoostOptions& options, BoostReport* report = nullptr);

// sign(w . x + b), sign(0) = +1, over raw features.
struct LinearHash {
  std::vector<double> w;
  double b = 0.0;

  int evaluate(std::span<const float> x) const;
  double score(std::span<const float> x) const;
  bool operator==(const LinearHash&) const = default;
};

struct LinearOptions {
  double reg_strength = 1.0;
  int epochs = 10;
  std::uint64_t seed = 0;
};

// reg/2 * ||w||^2 + sum_i max(0, 1 - z_i (w . x_i + b))
double linear_objective(const LinearHash& h, const FeatureMatrix& x,
                        std::span<const std::int8_t> targets, double reg_strength);

// Pegasos-style stochastic subgradient descent with step 1 / (lambda t),
// lambda = reg / n. Training runs on standardized features with the bias as
// the weight of a constant feature, so the regularizer acts on that scale.
// The result is mapped back to raw feature scale; of the last iterate and the
// average of the final epoch's iterates, the one with lower linear_objective
// is returned.
LinearHash train_linear_hash(const FeatureMatrix& x, std::span<const std::int8_t> targets,
                             const LinearOptions& options);

using HashFunction = std::variant<BoostedHash, LinearHash>;

// Bit for one example. Trees read the quantized row, linear hashes the raw row.
int eval_hash(const BoostedHash& h, std::span<const std::uint8_t> bins);
int eval_hash(const LinearHash& h, std::span<const float> x);

}  // namespace fasthash
