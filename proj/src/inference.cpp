#include "fasthash/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fasthash/error.hpp"
#include "fasthash/random.hpp"

namespace fasthash {

BlockCover build_blocks(const SimilarityGraph& sim, std::uint64_t seed) {
  const std::size_t n = sim.size();
  Rng rng(seed);
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0u);
  std::vector<std::size_t> position(n);
  std::iota(position.begin(), position.end(), std::size_t{0});
  std::vector<std::uint32_t> block_stamp(n, 0);  // block id + 1 of the block that owns i

  auto remove_from_pool = [&](std::uint32_t v) {
    const std::size_t p = position[v];
    const std::uint32_t last = pool.back();
    pool[p] = last;
    position[last] = p;
    pool.pop_back();
  };

  BlockCover cover;
  while (!pool.empty()) {
    const std::uint32_t stamp = static_cast<std::uint32_t>(cover.blocks.size() + 1);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::uint32_t seed_example = pool[pick(rng)];

    Block block{seed_example};
    block_stamp[seed_example] = stamp;
    remove_from_pool(seed_example);

    for (const auto& candidate : sim.neighbors(seed_example)) {
      if (candidate.sign <= 0 || block_stamp[candidate.index] != 0) continue;
      bool conflict = false;
      for (const auto& nb : sim.neighbors(candidate.index)) {
        if (nb.sign < 0 && block_stamp[nb.index] == stamp) {
          conflict = true;
          break;
        }
      }
      if (conflict) continue;
      block.push_back(candidate.index);
      block_stamp[candidate.index] = stamp;
      remove_from_pool(candidate.index);
    }
    cover.blocks.push_back(std::move(block));
  }
  return cover;
}

BlockCover singleton_cover(std::size_t n) {
  BlockCover cover;
  cover.blocks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) cover.blocks.push_back({static_cast<std::uint32_t>(i)});
  return cover;
}

bool is_valid_block(const SimilarityGraph& sim, const Block& block) {
  if (block.empty()) return false;
  Block sorted = block;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  if (sorted.back() >= sim.size()) return false;
  for (std::uint32_t i : sorted) {
    for (const auto& nb : sim.neighbors(i)) {
      if (nb.sign < 0 && std::binary_search(sorted.begin(), sorted.end(), nb.index)) return false;
    }
  }
  return true;
}

bool is_valid_cover(const SimilarityGraph& sim, const BlockCover& cover) {
  std::vector<bool> covered(sim.size(), false);
  for (const auto& block : cover.blocks) {
    if (!is_valid_block(sim, block)) return false;
    for (std::uint32_t i : block) covered[i] = true;
  }
  return std::all_of(covered.begin(), covered.end(), [](bool c) { return c; });
}

BqpInstance::BqpInstance(std::size_t n, std::span<const Term> terms) : n_(n) {
  std::vector<std::size_t> degree(n, 0);
  for (const auto& t : terms) {
    if (t.i >= n || t.j >= n || t.i == t.j) throw ContractViolation("BqpInstance: bad term index");
    if (!std::isfinite(t.value)) throw ContractViolation("BqpInstance: non-finite coefficient");
    if (t.value == 0.0) continue;
    ++degree[t.i];
    ++degree[t.j];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  entries_.resize(offsets_[n]);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& t : terms) {
    if (t.value == 0.0) continue;
    entries_[cursor[t.i]++] = {t.j, t.value};
    entries_[cursor[t.j]++] = {t.i, t.value};
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto first = entries_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    auto last = entries_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    std::sort(first, last, [](const BqpEntry& a, const BqpEntry& b) { return a.column < b.column; });
    if (std::adjacent_find(first, last, [](const BqpEntry& a, const BqpEntry& b) {
          return a.column == b.column;
        }) != last) {
      throw ContractViolation("BqpInstance: duplicate term for row " + std::to_string(i));
    }
  }
}

BqpInstance BqpInstance::from_graph(const SimilarityGraph& sim, LossKind kind, int r,
                                    std::span<const std::uint32_t> prev_distance) {
  if (prev_distance.size() != sim.pair_count()) {
    throw ContractViolation("BqpInstance::from_graph: one prev_distance per pair required");
  }
  std::vector<Term> terms;
  terms.reserve(sim.pair_count());
  const auto& pairs = sim.pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const PairState state{pairs[k].y, static_cast<int>(prev_distance[k]), r};
    const double a = pair_coefficient(kind, state);
    if (a != 0.0) terms.push_back({pairs[k].i, pairs[k].j, a});
  }
  return BqpInstance(sim.size(), terms);
}

double BqpInstance::coefficient(std::size_t i, std::size_t j) const {
  const auto r = row(i);
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const BqpEntry& e, std::size_t c) { return e.column < c; });
  return (it != r.end() && it->column == j) ? it->value : 0.0;
}

double BqpInstance::local_field(std::size_t i, std::span<const std::int8_t> z) const {
  double h = 0.0;
  for (const auto& e : row(i)) h += e.value * z[e.column];
  return h;
}

double BqpInstance::objective(std::span<const std::int8_t> z) const {
  if (z.size() != n_) throw ContractViolation("BqpInstance::objective: assignment size");
  double total = 0.0;
  for (std::size_t i = 0; i < n_; ++i) total += z[i] * local_field(i, z);
  return total;
}

double BqpInstance::abs_sum() const {
  double total = 0.0;
  for (const auto& e : entries_) total += std::abs(e.value);
  return total;
}

namespace {

// Reusable scratch for block energies: maps example -> position in the block.
class BlockEnergyAssembler {
 public:
  explicit BlockEnergyAssembler(std::size_t n) : local_(n, -1) {}

  EnergyInstance assemble(const BqpInstance& bqp, const Block& block,
                          std::span<const std::int8_t> codes) {
    for (std::size_t k = 0; k < block.size(); ++k) {
      if (block[k] >= local_.size()) throw ContractViolation("block member out of range");
      local_[block[k]] = static_cast<int>(k);
    }
    std::vector<UnaryCost> unary(block.size());
    std::vector<PairwiseTerm> pairwise;
    for (std::size_t k = 0; k < block.size(); ++k) {
      double u = 0.0;
      for (const auto& e : bqp.row(block[k])) {
        const int other = local_[e.column];
        if (other >= 0) {
          pairwise.push_back(
              {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(other), e.value});
        } else {
          u += e.value * codes[e.column];
        }
      }
      u *= 2.0;
      unary[k] = {-u, u};
    }
    for (std::uint32_t v : block) local_[v] = -1;
    return EnergyInstance(std::move(unary), std::move(pairwise));
  }

 private:
  std::vector<int> local_;
};

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

}  // namespace

EnergyInstance assemble_block_energy(const BqpInstance& bqp, const Block& block,
                                     std::span<const std::int8_t> codes) {
  if (codes.size() != bqp.size()) throw ContractViolation("assemble_block_energy: codes size");
  BlockEnergyAssembler assembler(bqp.size());
  return assembler.assemble(bqp, block, codes);
}

SignVector block_graphcut_bit(const BqpInstance& bqp, const BlockCover& cover,
                              std::span<const std::int8_t> init,
                              const BlockGraphCutOptions& options) {
  if (options.sweeps < 1) throw ContractViolation("block_graphcut_bit: sweeps must be >= 1");
  if (init.size() != bqp.size()) throw ContractViolation("block_graphcut_bit: init size");
  SignVector codes(init.begin(), init.end());
  BlockEnergyAssembler assembler(bqp.size());
  Rng rng(options.seed);
  auto order = identity_order(cover.blocks.size());
  SignVector before;
  SignVector current_block;

  for (int sweep = 0; sweep < options.sweeps; ++sweep) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b : order) {
      const Block& block = cover.blocks[b];
      const EnergyInstance energy = assembler.assemble(bqp, block, codes);
      const double objective_before =
          options.check_monotone ? bqp.objective(codes) : 0.0;
      if (options.on_update) before = codes;

      current_block.resize(block.size());
      for (std::size_t k = 0; k < block.size(); ++k) current_block[k] = codes[block[k]];
      const EnergyMinimum best = minimize_energy(energy);
      if (best.energy < energy.evaluate(current_block)) {
        for (std::size_t k = 0; k < block.size(); ++k) codes[block[k]] = best.z[k];
      }

      if (options.check_monotone) {
        const double objective_after = bqp.objective(codes);
        const double slack = 1e-9 * (1.0 + std::abs(objective_before));
        if (objective_after > objective_before + slack) {
          throw NumericError("block update increased the objective from " +
                             std::to_string(objective_before) + " to " +
                             std::to_string(objective_after));
        }
      }
      if (options.on_update) options.on_update(BlockUpdate{block, energy, before, codes});
    }
  }
  return codes;
}

SignVector icm_bit(const BqpInstance& bqp, std::span<const std::int8_t> init, int sweeps,
                   std::uint64_t seed) {
  if (sweeps < 1) throw ContractViolation("icm_bit: sweeps must be >= 1");
  if (init.size() != bqp.size()) throw ContractViolation("icm_bit: init size");
  SignVector codes(init.begin(), init.end());
  Rng rng(seed);
  auto order = identity_order(bqp.size());
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      // Conditional energy of z_i is u * z_i with u = 2 * local field.
      const double u = 2.0 * bqp.local_field(i, codes);
      if (-u * codes[i] < u * codes[i]) codes[i] = static_cast<std::int8_t>(-codes[i]);
    }
  }
  return codes;
}

SignVector random_signs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SignVector z(n);
  for (auto& v : z) v = (rng() >> 63) ? 1 : -1;
  return z;
}

namespace {

SignVector threshold(std::span<const double> x) {
  SignVector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] >= 0.0 ? 1 : -1;
  return z;
}

void multiply(const BqpInstance& bqp, std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < bqp.size(); ++i) {
    double s = 0.0;
    for (const auto& e : bqp.row(i)) s += e.value * x[e.column];
    out[i] = s;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double continuous_objective(const BqpInstance& bqp, std::span<const double> x,
                            std::vector<double>& scratch) {
  multiply(bqp, x, scratch);
  return dot(x, scratch);
}

}  // namespace

SpectralResult spectral_bit(const BqpInstance& bqp, const SpectralOptions& options) {
  const std::size_t n = bqp.size();
  if (n < 2) throw ContractViolation("spectral_bit: need at least 2 variables");

  SpectralResult result;
  double sigma = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (const auto& e : bqp.row(i)) row_sum += std::abs(e.value);
    sigma = std::max(sigma, row_sum);
  }
  if (sigma == 0.0) {
    result.relaxed.assign(n, 1.0);
    result.z.assign(n, 1);
    return result;
  }

  // Power iteration on B = sigma I - A (positive semidefinite by Gershgorin).
  std::vector<double> v(n), bv(n);
  {
    Rng rng(options.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& x : v) x = gauss(rng);
    const double norm = std::sqrt(dot(v, v));
    for (auto& x : v) x /= norm;
  }
  bool converged = false;
  int iter = 0;
  for (; iter < options.max_power_iters; ++iter) {
    multiply(bqp, v, bv);
    for (std::size_t i = 0; i < n; ++i) bv[i] = sigma * v[i] - bv[i];
    const double mu = dot(v, bv);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += (bv[i] - mu * v[i]) * (bv[i] - mu * v[i]);
    const double norm = std::sqrt(dot(bv, bv));
    if (norm == 0.0) break;
    if (std::sqrt(residual) <= options.tolerance * mu) {
      converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = bv[i] / norm;
  }
  result.power_iterations = iter;

  if (!converged) {
    result.fell_back = true;
    const SignVector init = random_signs(n, mix_seed(options.seed, 1));
    result.z = icm_bit(bqp, init, options.fallback_sweeps, mix_seed(options.seed, 2));
    result.objective = bqp.objective(result.z);
    result.raw_threshold_objective = result.objective;
    return result;
  }

  // Eigenvectors are defined up to sign; pick the one with non-negative sum,
  // then a positive first non-zero entry, so the result does not depend on
  // the random start.
  double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (sum == 0.0) {
    const auto first = std::find_if(v.begin(), v.end(), [](double x) { return x != 0.0; });
    sum = first != v.end() ? *first : 0.0;
  }
  double scale = std::sqrt(static_cast<double>(n)) / std::sqrt(dot(v, v));
  if (sum < 0.0) scale = -scale;
  for (auto& x : v) x *= scale;
  result.relaxed = v;
  const SignVector raw = threshold(v);
  result.raw_threshold_objective = bqp.objective(raw);

  // Projected gradient on x^T A x over the box [-1, 1]^n.
  std::vector<double> x(v), grad(n), candidate(n), scratch(n);
  for (auto& xi : x) xi = std::clamp(xi, -1.0, 1.0);
  double fx = continuous_objective(bqp, x, scratch);
  double step = 1.0 / (2.0 * sigma);
  for (int it = 0; it < options.refine_iters; ++it) {
    multiply(bqp, x, grad);
    for (auto& g : grad) g *= 2.0;
    bool accepted = false;
    step *= 2.0;
    for (int backtrack = 0; backtrack < 40; ++backtrack) {
      double model = fx;
      double move_sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        candidate[i] = std::clamp(x[i] - step * grad[i], -1.0, 1.0);
        const double d = candidate[i] - x[i];
        model += grad[i] * d;
        move_sq += d * d;
      }
      if (move_sq == 0.0) break;
      model += move_sq / (2.0 * step);
      const double fc = continuous_objective(bqp, candidate, scratch);
      if (fc <= model) {
        x.swap(candidate);
        fx = fc;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }

  SignVector refined = threshold(x);
  const double refined_objective = bqp.objective(refined);
  if (refined_objective <= result.raw_threshold_objective) {
    result.z = std::move(refined);
    result.objective = refined_objective;
  } else {
    result.z = raw;
    result.objective = result.raw_threshold_objective;
  }
  return result;
}

BruteForceResult brute_force_bqp(const BqpInstance& bqp) {
  const std::size_t n = bqp.size();
  if (n > kBruteForceLimit) {
    throw ContractViolation("brute_force_bqp: n = " + std::to_string(n) + " exceeds limit " +
                            std::to_string(kBruteForceLimit));
  }
  BruteForceResult best;
  SignVector z(n);
  bool have = false;
  // Mask bit (n-1-i) holds b_i, so descending masks walk the strings in
  // descending lexicographic order and the first strict minimum wins ties.
  for (std::uint64_t mask = (std::uint64_t{1} << n); mask-- > 0;) {
    for (std::size_t i = 0; i < n; ++i) z[i] = ((mask >> (n - 1 - i)) & 1u) ? 1 : -1;
    const double value = bqp.objective(z);
    if (!have || value < best.objective) {
      best.objective = value;
      best.z = z;
      have = true;
    }
  }
  return best;
}

}  // namespace fasthash
