#pragma once

// Single-bit inference comparison used by `fasthash infer-bench`.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fasthash/core.hpp"
#include "fasthash/loss.hpp"
#include "fasthash/trainer.hpp"

namespace fasthash {

struct InferenceBenchRow {
  InferenceMethod method = InferenceMethod::kBlockGraphCut;
  std::uint64_t seed = 0;
  double objective = 0.0;
  double normalized = 0.0;  // objective / sum |a_ij|
  double seconds = 0.0;     // includes block construction for Block GraphCut
};

struct InferenceBenchOptions {
  LossKind loss = LossKind::kKsh;
  int sweeps = 2;
  std::uint64_t seed = 1;
};

// Solves the first-bit problem of `sim` with Block GraphCut, ICM and the
// spectral method. Block GraphCut and ICM start from the same random codes.
std::vector<InferenceBenchRow> bench_inference(const SimilarityGraph& sim,
                                               const InferenceBenchOptions& options);

// CSV columns: method,seed,objective,normalized,seconds
void write_bench_csv(std::ostream& out, const std::vector<InferenceBenchRow>& rows,
                     bool header = true);

}  // namespace fasthash
