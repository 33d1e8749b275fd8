#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fasthash/dataset.hpp"
#include "fasthash/error.hpp"
#include "fasthash/trainer.hpp"
#include "oracles.hpp"

using namespace fasthash;

namespace {

struct Fixture {
  FeatureMatrix features;
  Labels labels;
  SimilarityGraph sim;
  TrainConfig config;
};

Fixture small_problem(LearnerKind learner = LearnerKind::kTree) {
  SyntheticOptions options;
  options.db_count = 150;
  options.query_count = 1;
  options.dims = 8;
  options.classes = 3;
  options.seed = 11;
  const SyntheticSplit split = make_synthetic(options);
  Fixture f{split.db, multiclass_labels(split.db_labels), {}, {}};
  f.config.bits = 6;
  f.config.rounds = 8;
  f.config.tree_depth = 2;
  f.config.max_neighbors = 20;
  f.config.learner = learner;
  f.sim = build_training_graph(f.labels, f.config);
  return f;
}

std::vector<int> column_signs(const BitMatrix& codes, std::size_t j) {
  std::vector<int> z(codes.bits());
  for (std::size_t r = 0; r < codes.bits(); ++r) z[r] = codes.get(r, j);
  return z;
}

}  // namespace

TEST_CASE("two similar points receive identical codes") {
  const FeatureMatrix x(2, 1, {0.0f, 1.0f});
  const SimilarityGraph sim(2, {{0, 1, 1}});
  TrainConfig config;
  config.bits = 4;
  config.rounds = 5;
  const TrainResult r = train(x, sim, config, true);
  CHECK(r.model.bits() == 4);
  for (std::size_t b = 0; b < 4; ++b) CHECK(r.codes.get(b, 0) == r.codes.get(b, 1));
}

TEST_CASE("stored codes equal the hash outputs and the final loss is consistent") {
  for (LearnerKind learner : {LearnerKind::kTree, LearnerKind::kLinear}) {
    const Fixture f = small_problem(learner);
    const TrainResult r = train(f.features, f.sim, f.config, true);
    const BitMatrix encoded = encode(r.model, f.features, 2);
    CHECK(encoded.words() == r.codes.words());

    REQUIRE(r.diagnostics.size() == f.config.bits);
    double loss = 0.0;
    for (const auto& p : f.sim.pairs()) {
      const int d = oracle::hamming(column_signs(r.codes, p.i), column_signs(r.codes, p.j));
      loss += oracle::loss(f.config.loss, static_cast<int>(f.config.bits), p.y, d);
    }
    CHECK(r.diagnostics.back().loss == doctest::Approx(loss).epsilon(1e-9));
    for (const auto& diag : r.diagnostics) {
      CHECK(diag.objective_inferred <= diag.objective_init + 1e-9);
      CHECK(diag.classification_error >= 0.0);
      CHECK(diag.classification_error <= 1.0);
    }
  }
}

TEST_CASE("training is deterministic and every inference method runs") {
  Fixture f = small_problem();
  const TrainResult a = train(f.features, f.sim, f.config);
  const TrainResult b = train(f.features, f.sim, f.config);
  CHECK(a.model == b.model);
  CHECK(serialize_model(a.model) == serialize_model(b.model));
  for (InferenceMethod m : {InferenceMethod::kIcm, InferenceMethod::kSpectral}) {
    f.config.inference = m;
    const TrainResult r = train(f.features, f.sim, f.config, true);
    CHECK(encode(r.model, f.features).words() == r.codes.words());
  }
}

TEST_CASE("model survives save and load byte for byte") {
  for (LearnerKind learner : {LearnerKind::kTree, LearnerKind::kLinear}) {
    const Fixture f = small_problem(learner);
    const TrainResult r = train(f.features, f.sim, f.config);
    const auto dir = std::filesystem::temp_directory_path() / "fasthash_trainer_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "model.fhsh";
    save_model(r.model, path);
    const HashModel loaded = load_model(path);
    CHECK(loaded == r.model);
    CHECK(serialize_model(loaded) == serialize_model(r.model));
    CHECK(encode(loaded, f.features).words() == r.codes.words());
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("damaged model bytes raise the matching error type") {
  const Fixture f = small_problem();
  TrainConfig config = f.config;
  config.bits = 2;
  const auto bytes = serialize_model(train(f.features, f.sim, config).model);

  std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + bytes.size() / 2);
  CHECK_THROWS_AS(deserialize_model(truncated), TruncatedFileError);
  CHECK_THROWS_AS(deserialize_model(std::vector<std::uint8_t>{'F', 'H'}), TruncatedFileError);

  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_model(magic), CorruptHeaderError);

  auto version = bytes;
  version[4] = static_cast<std::uint8_t>(HashModel::kFormatVersion + 1);
  CHECK_THROWS_AS(deserialize_model(version), VersionMismatchError);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(deserialize_model(trailing), FormatError);

  CHECK_THROWS_AS(load_model("/nonexistent/fasthash/model.fhsh"), DataError);
}

TEST_CASE("training input errors") {
  const FeatureMatrix x(2, 1, {0.0f, 1.0f});
  CHECK_THROWS_AS(train(x, SimilarityGraph(2, {}), TrainConfig{}), DataError);
  CHECK_THROWS_AS(train(x, SimilarityGraph(3, {{0, 1, 1}}), TrainConfig{}), ContractViolation);
  TrainConfig bad;
  bad.bits = 0;
  CHECK_THROWS_AS(train(x, SimilarityGraph(2, {{0, 1, 1}}), bad), UsageError);
  bad = {};
  bad.trim_fraction = 1.0;
  CHECK_THROWS_AS(validate(bad), UsageError);
  CHECK_THROWS_AS(parse_inference_method("annealing"), UsageError);
  CHECK(parse_learner_kind(to_string(LearnerKind::kLinear)) == LearnerKind::kLinear);
  CHECK(parse_inference_method(to_string(InferenceMethod::kSpectral)) == InferenceMethod::kSpectral);

  const Fixture f = small_problem();
  TrainConfig small = f.config;
  small.bits = 1;
  const TrainResult r = train(f.features, f.sim, small);
  const FeatureMatrix wrong(1, 3, {0.0f, 0.0f, 0.0f});
  CHECK_THROWS_AS(encode(r.model, wrong), ContractViolation);
}

TEST_CASE("diagnostics csv has one row per bit") {
  const Fixture f = small_problem();
  const TrainResult r = train(f.features, f.sim, f.config);
  std::ostringstream out;
  write_diagnostics_csv(out, r.diagnostics);
  std::istringstream in(out.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == f.config.bits + 1);
}
