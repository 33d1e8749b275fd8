#pragma once

// Per-bit binary code inference.
//
// For bit r the inference problem is the binary quadratic program
//   min_z  sum_i sum_j a_ij z_i z_j,   z in {-1,+1}^n,
// with a_ij = l11 - l_neg11 for every labelled pair (zero otherwise). The sum
// runs over ordered pairs, so each unordered pair contributes 2 * a_ij z_i z_j.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fasthash/core.hpp"
#include "fasthash/loss.hpp"
#include "fasthash/maxflow.hpp"

namespace fasthash {

using Block = std::vector<std::uint32_t>;

struct BlockCover {
  std::vector<Block> blocks;
};

// Greedy block construction. Repeatedly takes a random uncovered example,
// considers it together with its still-uncovered similar neighbours (in
// adjacency order), and admits each candidate that is not dissimilar to any
// member admitted so far.
BlockCover build_blocks(const SimilarityGraph& sim, std::uint64_t seed);

// One block per example, in index order. Block GraphCut over this cover is ICM.
BlockCover singleton_cover(std::size_t n);

// Nonempty, in range, no duplicate members, no dissimilar pair inside.
bool is_valid_block(const SimilarityGraph& sim, const Block& block);
// Every block valid and the union covers all examples.
bool is_valid_cover(const SimilarityGraph& sim, const BlockCover& cover);

struct BqpEntry {
  std::uint32_t column = 0;
  double value = 0.0;
};

// Sparse symmetric coefficient matrix with zero diagonal, stored as CSR rows.
class BqpInstance {
 public:
  struct Term {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    double value = 0.0;
  };

  BqpInstance() = default;
  // Each unordered pair at most once; zero coefficients are dropped.
  BqpInstance(std::size_t n, std::span<const Term> terms);

  // Coefficients for bit r from the per-pair distances over bits 1..r-1.
  // prev_distance is aligned with sim.pairs().
  static BqpInstance from_graph(const SimilarityGraph& sim, LossKind kind, int r,
                                std::span<const std::uint32_t> prev_distance);

  std::size_t size() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }
  std::span<const BqpEntry> row(std::size_t i) const {
    return {entries_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  double coefficient(std::size_t i, std::size_t j) const;

  // z^T A z.
  double objective(std::span<const std::int8_t> z) const;
  // sum_ij |a_ij|; objective / abs_sum lies in [-1, 1].
  double abs_sum() const;

  // sum_j a_ij z_j
  double local_field(std::size_t i, std::span<const std::int8_t> z) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<BqpEntry> entries_;
};

// Block-conditional energy with everything outside the block frozen at `codes`:
//   sum_{i,j in B} a_ij z_i z_j + sum_{i in B} u_i z_i,
//   u_i = 2 sum_{j not in B} a_ij zhat_j.
// Pairwise terms are listed once per ordered pair (i,j) with weight a_ij.
// Variable k of the result is block[k]. Differs from the full objective by a
// constant when only block variables change.
EnergyInstance assemble_block_energy(const BqpInstance& bqp, const Block& block,
                                     std::span<const std::int8_t> codes);

struct BlockUpdate {
  const Block& block;
  const EnergyInstance& energy;
  std::span<const std::int8_t> codes_before;
  std::span<const std::int8_t> codes_after;
};

struct BlockGraphCutOptions {
  int sweeps = 2;
  std::uint64_t seed = 0;
  // Recompute the full objective around every block update and throw
  // NumericError if it increases.
  bool check_monotone = false;
  // Called after every block update (test and diagnostics hook).
  std::function<void(const BlockUpdate&)> on_update;
};

// Block coordinate descent: each sweep visits the blocks in a fresh random
// order and replaces the block's codes with the min-cut solution of its
// conditional energy when that is strictly better than the current codes.
SignVector block_graphcut_bit(const BqpInstance& bqp, const BlockCover& cover,
                              std::span<const std::int8_t> init, const BlockGraphCutOptions& options);

// Single-variable descent. Visits variables in the same order Block GraphCut
// would visit the singleton cover, flipping z_i iff that strictly lowers the
// objective.
SignVector icm_bit(const BqpInstance& bqp, std::span<const std::int8_t> init, int sweeps,
                   std::uint64_t seed);

struct SpectralOptions {
  int refine_iters = 50;
  int max_power_iters = 5000;
  // Stop once ||B v - mu v|| <= tolerance * mu with B = sigma I - A.
  double tolerance = 1e-3;
  std::uint64_t seed = 0;
  int fallback_sweeps = 2;
};

struct SpectralResult {
  SignVector z;
  double objective = 0.0;
  // Minimum eigenvector of A scaled to squared norm n, signed so its sum is >= 0.
  std::vector<double> relaxed;
  double raw_threshold_objective = 0.0;
  int power_iterations = 0;
  // Power iteration hit the cap; z came from random init + ICM instead.
  bool fell_back = false;
};

// Spectral relaxation: minimum eigenvector of A by power iteration on
// sigma I - A, box-constrained refinement by projected gradient with
// backtracking, thresholding at 0 (ties to +1).
SpectralResult spectral_bit(const BqpInstance& bqp, const SpectralOptions& options = {});

struct BruteForceResult {
  SignVector z;
  double objective = 0.0;
};

inline constexpr std::size_t kBruteForceLimit = 20;

// Exhaustive minimum of z^T A z. Among tied minima returns the one whose
// {0,1} string b_0 b_1 ... (b = (z + 1) / 2) is lexicographically greatest.
BruteForceResult brute_force_bqp(const BqpInstance& bqp);

// Draws n uniform signs.
SignVector random_signs(std::size_t n, std::uint64_t seed);

}  // namespace fasthash
