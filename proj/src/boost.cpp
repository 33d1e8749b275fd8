#include "fasthash/boost.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fasthash/error.hpp"
#include "fasthash/random.hpp"

namespace fasthash {

StumpFit train_stump(const QuantizedFeatures& q, std::span<const std::int8_t> labels,
                     std::span<const double> weights, std::span<const std::uint32_t> dims,
                     std::span<const std::uint32_t> subset) {
  const std::size_t n = q.rows();
  const std::size_t d = q.dims();
  if (labels.size() != n || weights.size() != n) {
    throw ContractViolation("train_stump: labels/weights must have one entry per example");
  }
  if (dims.empty()) throw ContractViolation("train_stump: no candidate dimensions");
  std::vector<std::uint32_t> candidates(dims.begin(), dims.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.back() >= d) throw ContractViolation("train_stump: dimension out of range");

  // hist[c][bin] = {weight of +1 labels, weight of -1 labels}
  std::vector<std::array<double, 2>> hist(candidates.size() * kNumBins, {0.0, 0.0});
  double pos_total = 0.0;
  double neg_total = 0.0;
  auto accumulate = [&](std::size_t i) {
    const double w = weights[i];
    if (w == 0.0) return;
    if (w < 0.0 || !std::isfinite(w)) throw ContractViolation("train_stump: bad weight");
    const int side = labels[i] > 0 ? 0 : 1;
    (side == 0 ? pos_total : neg_total) += w;
    const auto row = q.row(i);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      hist[c * kNumBins + row[candidates[c]]][side] += w;
    }
  };
  if (subset.empty()) {
    for (std::size_t i = 0; i < n; ++i) accumulate(i);
  } else {
    for (std::uint32_t i : subset) accumulate(i);
  }
  const double total = pos_total + neg_total;
  if (!(total > 0.0)) throw ContractViolation("train_stump: all weights are zero");

  StumpFit best;
  double best_error = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double pos_left = 0.0;
    double neg_left = 0.0;
    for (int t = 0; t < kNumCuts; ++t) {
      pos_left += hist[c * kNumBins + t][0];
      neg_left += hist[c * kNumBins + t][1];
      // polarity +1: left predicts +1, right predicts -1.
      const double err_plus = neg_left + (pos_total - pos_left);
      const double err_minus = pos_left + (neg_total - neg_left);
      if (err_plus < best_error) {
        best_error = err_plus;
        best.stump = {candidates[c], static_cast<std::uint8_t>(t), 1};
      }
      if (err_minus < best_error) {
        best_error = err_minus;
        best.stump = {candidates[c], static_cast<std::uint8_t>(t), -1};
      }
    }
  }
  best.weighted_error = std::max(0.0, best_error) / total;
  return best;
}

Tree::Tree(int depth, std::vector<TreeNode> nodes) : depth_(depth), nodes_(std::move(nodes)) {
  if (depth_ < 0 || depth_ > 20) throw ContractViolation("Tree: depth out of range");
  const std::size_t expected = (std::size_t{1} << (depth_ + 1)) - 1;
  if (nodes_.size() != expected) throw ContractViolation("Tree: node count does not match depth");
  const std::size_t internal_limit = (std::size_t{1} << depth_) - 1;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto& node = nodes_[k];
    if (node.leaf) {
      if (node.output != 1 && node.output != -1) throw ContractViolation("Tree: leaf output");
    } else {
      if (k >= internal_limit) throw ContractViolation("Tree: split below max depth");
      if (node.split.threshold_bin >= kNumCuts) throw ContractViolation("Tree: bad threshold");
    }
  }
}

Tree Tree::leaf(int output) {
  TreeNode node;
  node.output = static_cast<std::int8_t>(output >= 0 ? 1 : -1);
  return Tree(0, {node});
}

int Tree::evaluate(std::span<const std::uint8_t> bins) const {
  std::size_t k = 0;
  while (!nodes_[k].leaf) {
    const auto& s = nodes_[k].split;
    if (s.dim >= bins.size()) throw ContractViolation("Tree::evaluate: dimension mismatch");
    k = bins[s.dim] <= s.threshold_bin ? 2 * k + 1 : 2 * k + 2;
  }
  return nodes_[k].output;
}

namespace {

struct TreeGrower {
  const QuantizedFeatures& q;
  std::span<const std::int8_t> labels;
  std::span<const double> weights;
  const TreeOptions& options;
  std::vector<TreeNode>& nodes;
  Rng rng;
  std::vector<std::uint32_t> all_dims;

  std::vector<std::uint32_t> sample_dims() {
    const std::size_t d = all_dims.size();
    const std::size_t k = (options.dims_per_split == 0 || options.dims_per_split >= d)
                              ? d
                              : options.dims_per_split;
    if (k == d) return all_dims;
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, d - 1);
      std::swap(all_dims[i], all_dims[pick(rng)]);
    }
    std::vector<std::uint32_t> chosen(all_dims.begin(), all_dims.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  void grow(std::size_t node, int level, const std::vector<std::uint32_t>& members) {
    double pos = 0.0;
    double neg = 0.0;
    for (std::uint32_t i : members) (labels[i] > 0 ? pos : neg) += weights[i];
    TreeNode& self = nodes[node];
    self.leaf = true;
    self.output = pos >= neg ? 1 : -1;
    if (level >= options.max_depth || pos == 0.0 || neg == 0.0) return;

    const auto dims = sample_dims();
    const StumpFit fit = train_stump(q, labels, weights, dims, members);
    std::vector<std::uint32_t> left, right;
    double left_w = 0.0;
    double right_w = 0.0;
    for (std::uint32_t i : members) {
      if (q.at(i, fit.stump.dim) <= fit.stump.threshold_bin) {
        left.push_back(i);
        left_w += weights[i];
      } else {
        right.push_back(i);
        right_w += weights[i];
      }
    }
    if (left_w == 0.0 || right_w == 0.0) return;
    nodes[node].leaf = false;
    nodes[node].split = fit.stump;
    grow(2 * node + 1, level + 1, left);
    grow(2 * node + 2, level + 1, right);
  }
};

}  // namespace

Tree train_tree(const QuantizedFeatures& q, std::span<const std::int8_t> labels,
                std::span<const double> weights, const TreeOptions& options) {
  if (options.max_depth < 1) throw ContractViolation("train_tree: max_depth must be >= 1");
  if (labels.size() != q.rows() || weights.size() != q.rows()) {
    throw ContractViolation("train_tree: labels/weights must have one entry per example");
  }
  if (q.dims() == 0) throw ContractViolation("train_tree: no feature dimensions");
  std::vector<std::uint32_t> members;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    if (weights[i] > 0.0) members.push_back(static_cast<std::uint32_t>(i));
  }
  if (members.empty()) throw ContractViolation("train_tree: all weights are zero");

  std::vector<TreeNode> nodes((std::size_t{1} << (options.max_depth + 1)) - 1);
  TreeGrower grower{q, labels, weights, options, nodes, Rng(options.seed), {}};
  grower.all_dims.resize(q.dims());
  std::iota(grower.all_dims.begin(), grower.all_dims.end(), 0u);
  grower.grow(0, 0, members);
  return Tree(options.max_depth, std::move(nodes));
}

double BoostedHash::score(std::span<const std::uint8_t> bins) const {
  double s = 0.0;
  for (std::size_t q = 0; q < trees.size(); ++q) s += weights[q] * trees[q].evaluate(bins);
  return s;
}

int BoostedHash::evaluate(std::span<const std::uint8_t> bins) const {
  if (bins.size() != dimension) {
    throw ContractViolation("BoostedHash: input has " + std::to_string(bins.size()) +
                            " dimensions, model expects " + std::to_string(dimension));
  }
  return score(bins) >= 0.0 ? 1 : -1;
}

BoostedHash train_boosted_hash(const QuantizedFeatures& q, std::span<const std::int8_t> targets,
                               const BoostOptions& options, BoostReport* report) {
  const std::size_t n = q.rows();
  const std::size_t d = q.dims();
  if (options.rounds < 1) throw ContractViolation("train_boosted_hash: rounds must be >= 1");
  if (!(options.trim_fraction >= 0.0 && options.trim_fraction < 1.0) ||
      !(options.lazy_fraction >= 0.0 && options.lazy_fraction < 1.0)) {
    throw ContractViolation("train_boosted_hash: fractions must lie in [0, 1)");
  }
  if (targets.size() != n || n == 0) {
    throw ContractViolation("train_boosted_hash: one target per example required");
  }
  BoostReport local_report;
  BoostReport& rep = report ? *report : local_report;
  rep = BoostReport{};

  BoostedHash model;
  model.dimension = static_cast<std::uint32_t>(d);

  const bool constant = std::all_of(targets.begin(), targets.end(),
                                    [&](std::int8_t t) { return t == targets[0]; });
  if (constant) {
    model.trees.push_back(Tree::leaf(targets[0]));
    model.weights.push_back(1.0);
    rep.degenerate_targets = true;
    rep.trees_kept = 1;
    return model;
  }

  TreeOptions tree_options;
  tree_options.max_depth = options.max_depth;
  tree_options.dims_per_split =
      options.lazy_fraction > 0.0
          ? std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(options.lazy_fraction * d)))
          : 0;

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> fit_weights(n);
  std::vector<double> scores(n, 0.0);
  std::vector<std::int8_t> predictions(n);
  std::vector<std::uint32_t> order(n);
  const std::size_t trim_count = static_cast<std::size_t>(std::floor(options.trim_fraction * n));

  for (int round = 0; round < options.rounds; ++round) {
    rep.rounds_run = round + 1;
    fit_weights = w;
    if (trim_count > 0) {
      std::iota(order.begin(), order.end(), 0u);
      std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(trim_count),
                       order.end(), [&](std::uint32_t a, std::uint32_t b) {
                         return w[a] != w[b] ? w[a] < w[b] : a < b;
                       });
      for (std::size_t k = 0; k < trim_count; ++k) fit_weights[order[k]] = 0.0;
    }
    tree_options.seed = mix_seed(options.seed, static_cast<std::uint64_t>(round));
    Tree tree = train_tree(q, targets, fit_weights, tree_options);

    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      predictions[i] = static_cast<std::int8_t>(tree.evaluate(q.row(i)));
      if (predictions[i] != targets[i]) eps += w[i];
    }
    if (eps >= 0.5) {
      rep.stopped_weak = true;
      if (model.trees.empty()) {
        model.trees.push_back(std::move(tree));
        model.weights.push_back(1.0);
        for (std::size_t i = 0; i < n; ++i) scores[i] += predictions[i];
      }
      break;
    }
    const bool perfect = eps <= 0.0;
    if (perfect) eps = kMinBoostError;
    const double alpha = 0.5 * std::log((1.0 - eps) / eps);
    model.trees.push_back(std::move(tree));
    model.weights.push_back(alpha);
    rep.round_error.push_back(eps);

    double total = 0.0;
    double exp_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::exp(-alpha * targets[i] * predictions[i]);
      total += w[i];
      scores[i] += alpha * predictions[i];
      exp_loss += std::exp(-targets[i] * scores[i]);
    }
    for (auto& wi : w) wi /= total;
    rep.exp_loss.push_back(exp_loss / static_cast<double>(n));
    if (perfect) {
      rep.stopped_perfect = true;
      break;
    }
  }

  std::size_t wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if ((scores[i] >= 0.0 ? 1 : -1) != targets[i]) ++wrong;
  }
  rep.trees_kept = static_cast<int>(model.trees.size());
  rep.training_error = static_cast<double>(wrong) / static_cast<double>(n);
  return model;
}

double LinearHash::score(std::span<const float> x) const {
  double s = b;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * x[k];
  return s;
}

int LinearHash::evaluate(std::span<const float> x) const {
  if (x.size() != w.size()) {
    throw ContractViolation("LinearHash: input has " + std::to_string(x.size()) +
                            " dimensions, model expects " + std::to_string(w.size()));
  }
  return score(x) >= 0.0 ? 1 : -1;
}

double linear_objective(const LinearHash& h, const FeatureMatrix& x,
                        std::span<const std::int8_t> targets, double reg_strength) {
  double norm_sq = 0.0;
  for (double v : h.w) norm_sq += v * v;
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    hinge += std::max(0.0, 1.0 - targets[i] * h.score(x.row(i)));
  }
  return 0.5 * reg_strength * norm_sq + hinge;
}

LinearHash train_linear_hash(const FeatureMatrix& x, std::span<const std::int8_t> targets,
                             const LinearOptions& options) {
  const std::size_t n = x.rows();
  const std::size_t d = x.dims();
  if (options.epochs < 1) throw ContractViolation("train_linear_hash: epochs must be >= 1");
  if (!(options.reg_strength > 0.0)) {
    throw ContractViolation("train_linear_hash: reg_strength must be positive");
  }
  if (targets.size() != n || n == 0) {
    throw ContractViolation("train_linear_hash: one target per example required");
  }

  std::vector<double> mean(d, 0.0), scale(d, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += x.at(i, k);
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t k = 0; k < d; ++k) {
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (x.at(i, k) - mean[k]) * (x.at(i, k) - mean[k]);
    var /= static_cast<double>(n);
    if (var > 0.0) scale[k] = std::sqrt(var);
  }
  // Standardized design with a trailing constant feature for the bias.
  std::vector<double> design(n * (d + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) design[i * (d + 1) + k] = (x.at(i, k) - mean[k]) / scale[k];
    design[i * (d + 1) + d] = 1.0;
  }

  const double lambda = options.reg_strength / static_cast<double>(n);
  const double radius = 1.0 / std::sqrt(lambda);
  std::vector<double> w(d + 1, 0.0), average(d + 1, 0.0);
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(options.seed);
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const bool last_epoch = epoch + 1 == options.epochs;
    for (std::uint32_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double* xi = &design[i * (d + 1)];
      double margin = 0.0;
      for (std::size_t k = 0; k <= d; ++k) margin += w[k] * xi[k];
      margin *= targets[i];
      const double shrink = 1.0 - eta * lambda;
      for (auto& v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t k = 0; k <= d; ++k) w[k] += eta * targets[i] * xi[k];
      }
      double norm_sq = 0.0;
      for (double v : w) norm_sq += v * v;
      if (norm_sq > radius * radius) {
        const double f = radius / std::sqrt(norm_sq);
        for (auto& v : w) v *= f;
      }
      if (last_epoch) {
        for (std::size_t k = 0; k <= d; ++k) average[k] += w[k];
      }
    }
  }
  for (auto& v : average) v /= static_cast<double>(n);

  auto to_raw = [&](const std::vector<double>& ws) {
    LinearHash h;
    h.w.resize(d);
    h.b = ws[d];
    for (std::size_t k = 0; k < d; ++k) {
      h.w[k] = ws[k] / scale[k];
      h.b -= ws[k] * mean[k] / scale[k];
    }
    return h;
  };
  LinearHash last = to_raw(w);
  LinearHash averaged = to_raw(average);
  return linear_objective(averaged, x, targets, options.reg_strength) <=
                 linear_objective(last, x, targets, options.reg_strength)
             ? averaged
             : last;
}

int eval_hash(const BoostedHash& h, std::span<const std::uint8_t> bins) { return h.evaluate(bins); }
int eval_hash(const LinearHash& h, std::span<const float> x) { return h.evaluate(x); }

}  // namespace fasthash
