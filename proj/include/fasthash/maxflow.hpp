#pragma once

// s-t max-flow / min-cut and the reduction of a submodular pairwise binary
// energy to a cut problem.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fasthash/core.hpp"

namespace fasthash {

// Directed graph with implicit source and sink terminals. Regular nodes are
// 0..node_count()-1; source() and sink() index the two terminals. Every arc
// is stored with its reverse slot (arc k ^ 1).
class CutGraph {
 public:
  struct Arc {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    double capacity = 0.0;
  };

  explicit CutGraph(std::size_t node_count = 0);

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t source() const noexcept { return node_count_; }
  std::size_t sink() const noexcept { return node_count_ + 1; }

  // Adds from->to with `capacity` and to->from with `reverse_capacity`.
  void add_edge(std::size_t from, std::size_t to, double capacity, double reverse_capacity = 0.0);
  void add_terminal_edges(std::size_t node, double source_capacity, double sink_capacity);

  const std::vector<Arc>& arcs() const noexcept { return arcs_; }

 private:
  std::size_t node_count_ = 0;
  std::vector<Arc> arcs_;
};

struct MaxFlowResult {
  double flow = 0.0;
  // Per regular node: true when reachable from the source in the final
  // residual graph. Among several minimum cuts this picks the one with the
  // smallest source side.
  std::vector<bool> source_side;
};

// Dinic's blocking-flow augmenting-path algorithm on real capacities.
MaxFlowResult max_flow(const CutGraph& graph);

// Total capacity of arcs leaving the source side for a given labeling.
double cut_capacity(const CutGraph& graph, const std::vector<bool>& source_side);

struct UnaryCost {
  double neg = 0.0;  // cost when z = -1
  double pos = 0.0;  // cost when z = +1
};

// weight * z_i * z_j. Submodular iff weight <= 0.
struct PairwiseTerm {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double weight = 0.0;
};

// E(z) = sum_i unary_i(z_i) + sum_{terms} weight * z_i * z_j over z in {-1,+1}^k.
class EnergyInstance {
 public:
  EnergyInstance() = default;
  // Throws SubmodularityError on any positive pairwise weight.
  EnergyInstance(std::vector<UnaryCost> unary, std::vector<PairwiseTerm> pairwise);

  std::size_t size() const noexcept { return unary_.size(); }
  const std::vector<UnaryCost>& unary() const noexcept { return unary_; }
  const std::vector<PairwiseTerm>& pairwise() const noexcept { return pairwise_; }

  double evaluate(std::span<const std::int8_t> z) const;

 private:
  std::vector<UnaryCost> unary_;
  std::vector<PairwiseTerm> pairwise_;
};

// cut_capacity(graph, labeling) == energy(z) + constant for every labeling,
// where source side <=> z = +1.
struct CutReduction {
  CutGraph graph;
  double constant = 0.0;
};

CutReduction reduce_energy_to_cut(const EnergyInstance& energy);

SignVector signs_from_cut(const std::vector<bool>& source_side);

struct EnergyMinimum {
  SignVector z;
  double energy = 0.0;
};

// Exact minimizer via reduction + max-flow.
EnergyMinimum minimize_energy(const EnergyInstance& energy);

}  // namespace fasthash
