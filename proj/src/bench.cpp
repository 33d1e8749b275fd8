#include "fasthash/bench.hpp"

#include <chrono>
#include <ostream>

#include "fasthash/inference.hpp"
#include "fasthash/random.hpp"

namespace fasthash {

std::vector<InferenceBenchRow> bench_inference(const SimilarityGraph& sim,
                                               const InferenceBenchOptions& options) {
  using Clock = std::chrono::steady_clock;
  const std::vector<std::uint32_t> zero_distance(sim.pair_count(), 0);
  const BqpInstance bqp = BqpInstance::from_graph(sim, options.loss, 1, zero_distance);
  const double scale = bqp.abs_sum();
  const SignVector init = random_signs(sim.size(), mix_seed(options.seed, 2));

  std::vector<InferenceBenchRow> rows;
  auto record = [&](InferenceMethod method, const SignVector& z, Clock::time_point start) {
    InferenceBenchRow row;
    row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    row.method = method;
    row.seed = options.seed;
    row.objective = bqp.objective(z);
    row.normalized = scale > 0.0 ? row.objective / scale : 0.0;
    rows.push_back(row);
  };

  auto start = Clock::now();
  const BlockCover cover = build_blocks(sim, mix_seed(options.seed, 1));
  BlockGraphCutOptions gc;
  gc.sweeps = options.sweeps;
  gc.seed = mix_seed(options.seed, 3);
  record(InferenceMethod::kBlockGraphCut, block_graphcut_bit(bqp, cover, init, gc), start);

  start = Clock::now();
  record(InferenceMethod::kIcm, icm_bit(bqp, init, options.sweeps, mix_seed(options.seed, 3)), start);

  start = Clock::now();
  SpectralOptions spectral;
  spectral.seed = mix_seed(options.seed, 5);
  record(InferenceMethod::kSpectral, spectral_bit(bqp, spectral).z, start);
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<InferenceBenchRow>& rows, bool header) {
  if (header) out << "method,seed,objective,normalized,seconds\n";
  const auto precision = out.precision(17);
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << r.seed << ',' << r.objective << ',' << r.normalized
        << ',' << r.seconds << '\n';
  }
  out.precision(precision);
}

}  // namespace fasthash
