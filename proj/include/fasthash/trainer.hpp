#pragma once

// Bit-by-bit training loop: for each bit, infer target codes, fit one hash
// function to them, then overwrite the bit with the function's own outputs
// before moving on. Also owns the model file format.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fasthash/boost.hpp"
#include "fasthash/core.hpp"
#include "fasthash/loss.hpp"

namespace fasthash {

enum class InferenceMethod { kBlockGraphCut, kIcm, kSpectral };
enum class LearnerKind { kTree, kLinear };

InferenceMethod parse_inference_method(std::string_view name);  // blockgc | icm | spectral
std::string_view to_string(InferenceMethod method);
LearnerKind parse_learner_kind(std::string_view name);  // tree | linear
std::string_view to_string(LearnerKind learner);

struct TrainConfig {
  std::uint32_t bits = 32;
  LossKind loss = LossKind::kKsh;
  InferenceMethod inference = InferenceMethod::kBlockGraphCut;
  std::uint32_t sweeps = 2;
  LearnerKind learner = LearnerKind::kTree;
  std::uint32_t tree_depth = 4;
  std::uint32_t rounds = 200;
  double trim_fraction = 0.10;
  double lazy_fraction = 0.20;
  std::uint64_t seed = 1;
  std::uint32_t max_neighbors = 100;
  double linear_reg = 1.0;
  std::uint32_t linear_epochs = 10;
  // First bit starts from the spectral solution up to this many examples,
  // from random signs above it.
  std::uint32_t spectral_init_limit = 4096;
  // Later bits start from the previous bit's codes with this fraction flipped.
  double init_flip_fraction = 0.10;
  std::uint32_t spectral_refine_iters = 50;

  bool operator==(const TrainConfig&) const = default;
};

// Throws UsageError on out-of-range fields.
void validate(const TrainConfig& config);

struct HashModel {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::uint32_t dimension = 0;
  Quantizer quantizer;
  TrainConfig config;
  std::vector<HashFunction> functions;

  std::size_t bits() const noexcept { return functions.size(); }
  bool operator==(const HashModel&) const = default;
};

struct BitDiagnostics {
  std::uint32_t bit = 0;  // 1-based
  double objective_init = 0.0;
  double objective_inferred = 0.0;
  double objective_final = 0.0;  // after overwriting with the hash function outputs
  double normalized_inferred = 0.0;
  double classification_error = 0.0;  // fraction of inferred bits the function disagrees with
  double loss = 0.0;  // sum of pair losses over bits 1..r after the overwrite
  double seconds = 0.0;
};

struct TrainResult {
  HashModel model;
  BitMatrix codes;  // training codes after every overwrite
  std::vector<BitDiagnostics> diagnostics;
};

// Also cross-checks the incremental pair distances against a recount from the
// stored codes after every bit when `verify_distances` is set.
TrainResult train(const FeatureMatrix& features, const SimilarityGraph& sim,
                  const TrainConfig& config, bool verify_distances = false);

// Column j = [h_1(x_j), ..., h_m(x_j)].
BitMatrix encode(const HashModel& model, const FeatureMatrix& features, unsigned threads = 1);

// Writes diagnostics as CSV with a header row.
void write_diagnostics_csv(std::ostream& out, const std::vector<BitDiagnostics>& diagnostics);

// Little-endian binary layout:
//   "FHSH" | u32 version | config | u32 d | d x 257 f64 edges | u32 m |
//   m function records (u32 tag: 0 tree ensemble, 1 linear).
std::vector<std::uint8_t> serialize_model(const HashModel& model);
HashModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const HashModel& model, const std::filesystem::path& path);
HashModel load_model(const std::filesystem::path& path);

}  // namespace fasthash
