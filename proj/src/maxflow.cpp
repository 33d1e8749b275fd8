#include "fasthash/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fasthash/error.hpp"

namespace fasthash {

CutGraph::CutGraph(std::size_t node_count) : node_count_(node_count) {}

void CutGraph::add_edge(std::size_t from, std::size_t to, double capacity,
                        double reverse_capacity) {
  const std::size_t limit = node_count_ + 2;
  if (from >= limit || to >= limit) throw ContractViolation("CutGraph: node out of range");
  if (from == to) throw ContractViolation("CutGraph: self loop");
  if (!(capacity >= 0.0) || !(reverse_capacity >= 0.0) || !std::isfinite(capacity) ||
      !std::isfinite(reverse_capacity)) {
    throw ContractViolation("CutGraph: capacities must be finite and non-negative");
  }
  arcs_.push_back({static_cast<std::uint32_t>(from), static_cast<std::uint32_t>(to), capacity});
  arcs_.push_back(
      {static_cast<std::uint32_t>(to), static_cast<std::uint32_t>(from), reverse_capacity});
}

void CutGraph::add_terminal_edges(std::size_t node, double source_capacity,
                                  double sink_capacity) {
  if (node >= node_count_) throw ContractViolation("CutGraph: terminal edge on non-regular node");
  if (source_capacity > 0.0) add_edge(source(), node, source_capacity);
  if (sink_capacity > 0.0) add_edge(node, sink(), sink_capacity);
}

namespace {

class Dinic {
 public:
  explicit Dinic(const CutGraph& g)
      : total_nodes_(g.node_count() + 2),
        source_(g.source()),
        sink_(g.sink()),
        arcs_(g.arcs()),
        offsets_(total_nodes_ + 1, 0),
        level_(total_nodes_),
        next_arc_(total_nodes_) {
    double max_cap = 0.0;
    residual_.reserve(arcs_.size());
    for (const auto& a : arcs_) {
      residual_.push_back(a.capacity);
      max_cap = std::max(max_cap, a.capacity);
      ++offsets_[a.from + 1];
    }
    eps_ = 1e-12 * std::max(max_cap, 1e-300);
    for (std::size_t v = 0; v < total_nodes_; ++v) offsets_[v + 1] += offsets_[v];
    order_.resize(arcs_.size());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t k = 0; k < arcs_.size(); ++k) order_[cursor[arcs_[k].from]++] = k;
  }

  double run() {
    double flow = 0.0;
    while (build_levels()) {
      for (std::size_t v = 0; v < total_nodes_; ++v) next_arc_[v] = offsets_[v];
      while (true) {
        const double pushed = augment();
        if (pushed <= 0.0) break;
        flow += pushed;
      }
    }
    return flow;
  }

  std::vector<bool> source_side(std::size_t regular_nodes) {
    std::vector<bool> seen(total_nodes_, false);
    std::vector<std::size_t> stack{source_};
    seen[source_] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (std::size_t p = offsets_[v]; p < offsets_[v + 1]; ++p) {
        const std::size_t k = order_[p];
        const std::size_t w = arcs_[k].to;
        if (!seen[w] && residual_[k] > eps_) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    return {seen.begin(), seen.begin() + static_cast<std::ptrdiff_t>(regular_nodes)};
  }

 private:
  bool build_levels() {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<std::size_t> queue{source_};
    level_[source_] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t v = queue[head];
      for (std::size_t p = offsets_[v]; p < offsets_[v + 1]; ++p) {
        const std::size_t k = order_[p];
        const std::size_t w = arcs_[k].to;
        if (level_[w] < 0 && residual_[k] > eps_) {
          level_[w] = level_[v] + 1;
          queue.push_back(w);
        }
      }
    }
    return level_[sink_] >= 0;
  }

  // One source-sink path in the level graph, found with current-arc pointers.
  double augment() {
    path_.clear();
    std::size_t v = source_;
    while (v != sink_) {
      bool advanced = false;
      for (; next_arc_[v] < offsets_[v + 1]; ++next_arc_[v]) {
        const std::size_t k = order_[next_arc_[v]];
        const std::size_t w = arcs_[k].to;
        if (residual_[k] > eps_ && level_[w] == level_[v] + 1) {
          path_.push_back(k);
          v = w;
          advanced = true;
          break;
        }
      }
      if (advanced) continue;
      // Dead end: prune v from the level graph and retreat.
      level_[v] = -1;
      if (path_.empty()) return 0.0;
      const std::size_t k = path_.back();
      path_.pop_back();
      v = arcs_[k].from;
      ++next_arc_[v];
    }
    double bottleneck = std::numeric_limits<double>::infinity();
    for (std::size_t k : path_) bottleneck = std::min(bottleneck, residual_[k]);
    for (std::size_t k : path_) {
      residual_[k] -= bottleneck;
      residual_[k ^ 1] += bottleneck;
    }
    return bottleneck;
  }

  std::size_t total_nodes_;
  std::size_t source_;
  std::size_t sink_;
  const std::vector<CutGraph::Arc>& arcs_;
  std::vector<double> residual_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> order_;
  std::vector<int> level_;
  std::vector<std::size_t> next_arc_;
  std::vector<std::size_t> path_;
  double eps_ = 0.0;
};

}  // namespace

MaxFlowResult max_flow(const CutGraph& graph) {
  Dinic solver(graph);
  MaxFlowResult result;
  result.flow = solver.run();
  result.source_side = solver.source_side(graph.node_count());
  return result;
}

double cut_capacity(const CutGraph& graph, const std::vector<bool>& source_side) {
  if (source_side.size() != graph.node_count()) {
    throw ContractViolation("cut_capacity: labeling size does not match node count");
  }
  auto on_source_side = [&](std::size_t v) {
    if (v == graph.source()) return true;
    if (v == graph.sink()) return false;
    return static_cast<bool>(source_side[v]);
  };
  double total = 0.0;
  for (const auto& a : graph.arcs()) {
    if (on_source_side(a.from) && !on_source_side(a.to)) total += a.capacity;
  }
  return total;
}

EnergyInstance::EnergyInstance(std::vector<UnaryCost> unary, std::vector<PairwiseTerm> pairwise)
    : unary_(std::move(unary)), pairwise_(std::move(pairwise)) {
  for (const auto& u : unary_) {
    if (!std::isfinite(u.neg) || !std::isfinite(u.pos)) {
      throw ContractViolation("EnergyInstance: non-finite unary cost");
    }
  }
  for (const auto& t : pairwise_) {
    if (t.i >= unary_.size() || t.j >= unary_.size() || t.i == t.j) {
      throw ContractViolation("EnergyInstance: bad pairwise indices");
    }
    if (!std::isfinite(t.weight)) throw ContractViolation("EnergyInstance: non-finite weight");
    if (t.weight > 0.0) {
      throw SubmodularityError("pairwise term (" + std::to_string(t.i) + ", " +
                               std::to_string(t.j) + ") has positive weight " +
                               std::to_string(t.weight) + "; energy is not submodular");
    }
  }
}

double EnergyInstance::evaluate(std::span<const std::int8_t> z) const {
  if (z.size() != unary_.size()) throw ContractViolation("EnergyInstance: assignment size");
  double e = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) e += z[i] > 0 ? unary_[i].pos : unary_[i].neg;
  for (const auto& t : pairwise_) e += t.weight * z[t.i] * z[t.j];
  return e;
}

CutReduction reduce_energy_to_cut(const EnergyInstance& energy) {
  // Label x = 0 (source side) is z = +1, x = 1 (sink side) is z = -1.
  const std::size_t k = energy.size();
  std::vector<double> cost0(k), cost1(k);
  for (std::size_t i = 0; i < k; ++i) {
    cost0[i] = energy.unary()[i].pos;
    cost1[i] = energy.unary()[i].neg;
  }
  double offset = 0.0;  // energy = cut + offset
  CutGraph graph(k);
  for (const auto& t : energy.pairwise()) {
    if (t.weight == 0.0) continue;
    // theta(x_i, x_j) table: (0,0) = (1,1) = w, (0,1) = (1,0) = -w.
    // theta = w + (-2w) x_i + (2w) x_j + (-4w) (1 - x_i) x_j.
    offset += t.weight;
    cost1[t.i] += -2.0 * t.weight;
    cost1[t.j] += 2.0 * t.weight;
    graph.add_edge(t.i, t.j, -4.0 * t.weight);
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (cost1[i] > cost0[i]) {
      offset += cost0[i];
      graph.add_terminal_edges(i, cost1[i] - cost0[i], 0.0);
    } else {
      offset += cost1[i];
      graph.add_terminal_edges(i, 0.0, cost0[i] - cost1[i]);
    }
  }
  return {std::move(graph), -offset};
}

SignVector signs_from_cut(const std::vector<bool>& source_side) {
  SignVector z(source_side.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = source_side[i] ? 1 : -1;
  return z;
}

EnergyMinimum minimize_energy(const EnergyInstance& energy) {
  const auto reduction = reduce_energy_to_cut(energy);
  const auto flow = max_flow(reduction.graph);
  EnergyMinimum out;
  out.z = signs_from_cut(flow.source_side);
  out.energy = energy.evaluate(out.z);
  return out;
}

}  // namespace fasthash
