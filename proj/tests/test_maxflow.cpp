#include <random>

#include "doctest.h"
#include "fasthash/error.hpp"
#include "fasthash/maxflow.hpp"
#include "oracles.hpp"

using namespace fasthash;

TEST_CASE("max flow on tiny graphs") {
  CutGraph chain(1);
  chain.add_terminal_edges(0, 3.0, 3.0);
  CHECK(max_flow(chain).flow == 3.0);

  CutGraph parallel(2);
  parallel.add_terminal_edges(0, 2.0, 2.0);
  parallel.add_terminal_edges(1, 5.0, 5.0);
  CHECK(max_flow(parallel).flow == 7.0);

  CutGraph bottleneck(2);
  bottleneck.add_terminal_edges(0, 10.0, 0.0);
  bottleneck.add_edge(0, 1, 4.0);
  bottleneck.add_terminal_edges(1, 0.0, 10.0);
  const auto r = max_flow(bottleneck);
  CHECK(r.flow == 4.0);
  CHECK(r.source_side == std::vector<bool>{true, false});
}

TEST_CASE("cut graph rejects bad arcs") {
  CutGraph g(2);
  CHECK_THROWS_AS(g.add_edge(0, 0, 1.0), ContractViolation);
  CHECK_THROWS_AS(g.add_edge(0, 1, -1.0), ContractViolation);
  CHECK_THROWS_AS(g.add_edge(0, 5, 1.0), ContractViolation);
}

TEST_CASE("max flow equals brute-force min cut on random graphs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> cap(0.0, 10.0);
  std::bernoulli_distribution present(0.4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng() % 8;
    CutGraph g(k);
    for (std::size_t v = 0; v < k; ++v) {
      g.add_terminal_edges(v, present(rng) ? cap(rng) : 0.0, present(rng) ? cap(rng) : 0.0);
      for (std::size_t u = 0; u < k; ++u) {
        if (u != v && present(rng)) g.add_edge(v, u, cap(rng));
      }
    }
    const auto r = max_flow(g);
    const double best = oracle::min_cut(g);
    CHECK(r.flow == doctest::Approx(best).epsilon(1e-9));
    CHECK(cut_capacity(g, r.source_side) == doctest::Approx(r.flow).epsilon(1e-9));
  }
}

TEST_CASE("energy rejects supermodular terms") {
  CHECK_THROWS_AS(EnergyInstance({{0, 0}, {0, 0}}, {{0, 1, 0.5}}), SubmodularityError);
  CHECK_NOTHROW(EnergyInstance({{0, 0}, {0, 0}}, {{0, 1, -0.5}}));
}

TEST_CASE("energy reduction hand examples") {
  const auto single = minimize_energy(EnergyInstance({{0.0, -2.0}}, {}));
  CHECK(single.z == SignVector{1});
  CHECK(single.energy == -2.0);

  const auto pair = minimize_energy(EnergyInstance({{0, 0}, {0, 0}}, {{0, 1, -1.0}}));
  CHECK(pair.energy == -1.0);
  CHECK(pair.z[0] == pair.z[1]);
  // Residual reachability picks the smallest source side: both on the sink side.
  CHECK(pair.z == SignVector{-1, -1});
}

TEST_CASE("cut value minus constant equals energy for every labeling") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0), w(-2.0, 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + rng() % 6;
    std::vector<UnaryCost> unary(k);
    for (auto& c : unary) c = {u(rng), u(rng)};
    std::vector<PairwiseTerm> pairwise;
    for (std::uint32_t i = 0; i < k; ++i) {
      for (std::uint32_t j = 0; j < k; ++j) {
        if (i != j && rng() % 3 == 0) pairwise.push_back({i, j, w(rng)});
      }
    }
    const EnergyInstance e(unary, pairwise);
    const CutReduction red = reduce_energy_to_cut(e);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      const SignVector z = oracle::signs_from_mask(mask, k);
      std::vector<bool> side(k);
      for (std::size_t i = 0; i < k; ++i) side[i] = z[i] > 0;
      CHECK(cut_capacity(red.graph, side) - red.constant ==
            doctest::Approx(oracle::energy(e, z)).epsilon(1e-9));
    }
  }
}

TEST_CASE("min cut assignment reaches the exhaustive energy minimum") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5.0, 5.0), w(-3.0, 0.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng() % 10;
    std::vector<UnaryCost> unary(k);
    for (auto& c : unary) c = {u(rng), u(rng)};
    std::vector<PairwiseTerm> pairwise;
    for (std::uint32_t i = 0; i < k; ++i) {
      for (std::uint32_t j = i + 1; j < k; ++j) {
        if (rng() % 2 == 0) pairwise.push_back({i, j, w(rng)});
      }
    }
    const EnergyInstance e(unary, pairwise);
    const EnergyMinimum best = minimize_energy(e);
    CHECK(best.energy == doctest::Approx(oracle::min_energy(e)).epsilon(1e-9));
    CHECK(oracle::energy(e, best.z) == doctest::Approx(best.energy).epsilon(1e-9));
  }
}

TEST_CASE("max flow is deterministic") {
  CutGraph g(4);
  g.add_terminal_edges(0, 3, 1);
  g.add_terminal_edges(1, 1, 3);
  g.add_edge(0, 1, 2, 2);
  g.add_edge(1, 2, 1, 0);
  g.add_edge(2, 3, 5, 5);
  g.add_terminal_edges(3, 0, 4);
  const auto a = max_flow(g);
  const auto b = max_flow(g);
  CHECK(a.flow == b.flow);
  CHECK(a.source_side == b.source_side);
}
