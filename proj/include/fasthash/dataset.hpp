#pragma once

// Dataset files, label handling, similarity-graph construction, the
// key=value training config and the bundled synthetic generators.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fasthash/core.hpp"
#include "fasthash/trainer.hpp"

namespace fasthash {

// Feature file: "FHFM" | u32 version | u32 n | u32 d | n*d f32, row-major.
inline constexpr std::uint32_t kFeatureFormatVersion = 1;
std::vector<std::uint8_t> serialize_features(const FeatureMatrix& features);
FeatureMatrix deserialize_features(std::span<const std::uint8_t> bytes);
void save_features(const FeatureMatrix& features, const std::filesystem::path& path);
FeatureMatrix load_features(const std::filesystem::path& path);

// Codes file: "FHBC" | u32 m | u32 n | packed u64 columns.
std::vector<std::uint8_t> serialize_codes(const BitMatrix& codes);
BitMatrix deserialize_codes(std::span<const std::uint8_t> bytes);
void save_codes(const BitMatrix& codes, const std::filesystem::path& path);
BitMatrix load_codes(const std::filesystem::path& path);

enum class LabelMode { kAuto, kMulticlass, kMultilabel };
LabelMode parse_label_mode(std::string_view name);  // auto | multiclass | multilabel

// One class id per example, or one tag set per example. Tag names are mapped
// to ids in order of first appearance; each set is sorted and unique.
struct Labels {
  bool multilabel = false;
  std::vector<int> classes;
  std::vector<std::vector<std::uint32_t>> tags;
  std::vector<std::string> tag_names;

  std::size_t size() const noexcept { return multilabel ? tags.size() : classes.size(); }
};

// Auto mode picks multilabel when any line contains a comma. In multiclass
// mode every line must be one integer; in multilabel mode an empty line is an
// empty tag set.
Labels parse_labels(std::istream& in, LabelMode mode = LabelMode::kAuto);
Labels load_labels(const std::filesystem::path& path, LabelMode mode = LabelMode::kAuto);
void write_labels(std::ostream& out, const Labels& labels);
void save_labels(const Labels& labels, const std::filesystem::path& path);

Labels multiclass_labels(std::vector<int> classes);

// Query and database labels parsed together share one tag dictionary.
struct LabelPair {
  Labels db;
  Labels query;
};
LabelPair load_label_pair(const std::filesystem::path& db_path,
                          const std::filesystem::path& query_path, LabelMode mode);

// Relation used for the ground truth: +1 similar, -1 dissimilar, 0 undefined.
// Multilabel: >= 2 shared tags similar, exactly 1 undefined, 0 dissimilar.
int label_relation(const Labels& labels, std::size_t i, std::size_t j);

struct SimilarityReport {
  std::size_t pairs = 0;
  std::size_t similar = 0;
  std::size_t dissimilar = 0;
  std::size_t without_similar = 0;  // examples with no similar partner at all
};

// For each example, samples up to `max_neighbors` similar and `max_neighbors`
// dissimilar partners uniformly without replacement, then unions the pairs.
SimilarityGraph build_similarity(const Labels& labels, std::size_t max_neighbors,
                                 std::uint64_t seed, SimilarityReport* report = nullptr);

// Training graph for `config`: max_neighbors from the config, sampling seed
// derived from the config seed.
SimilarityGraph build_training_graph(const Labels& labels, const TrainConfig& config,
                                     SimilarityReport* report = nullptr);

// Flat key=value text. '#' starts a comment. Keys are the TrainConfig field
// names; unknown or repeated keys are UsageErrors.
TrainConfig parse_config(std::istream& in);
TrainConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const TrainConfig& config);

enum class SyntheticKind {
  kClusters,  // one Gaussian cluster per class
  kXor,       // two antipodal Gaussian clusters per class
};
SyntheticKind parse_synthetic_kind(std::string_view name);  // clusters | xor

struct SyntheticOptions {
  SyntheticKind kind = SyntheticKind::kClusters;
  std::size_t db_count = 2000;
  std::size_t query_count = 500;
  std::size_t dims = 100;
  std::size_t classes = 10;
  double center_scale = 1.0;  // std-dev of cluster centre coordinates
  double noise = 1.0;         // std-dev of points around their centre
  std::uint64_t seed = 1;
};

struct SyntheticSplit {
  FeatureMatrix db;
  std::vector<int> db_labels;
  FeatureMatrix query;
  std::vector<int> query_labels;
};

// Classes are balanced and their order is shuffled. Database and queries are
// drawn from the same clusters.
SyntheticSplit make_synthetic(const SyntheticOptions& options);

}  // namespace fasthash
