// fasthash: train | encode | eval | infer-bench | synth

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fasthash/bench.hpp"
#include "fasthash/dataset.hpp"
#include "fasthash/error.hpp"
#include "fasthash/evalkit.hpp"
#include "fasthash/log.hpp"
#include "fasthash/trainer.hpp"

namespace fh = fasthash;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code(fh::ErrorClass cls) {
  switch (cls) {
    case fh::ErrorClass::kUsage: return kExitUsage;
    case fh::ErrorClass::kData: return kExitData;
    case fh::ErrorClass::kNumeric: return kExitNumeric;
  }
  return kExitInternal;
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

int report_error(const char* cls, const std::string& message, int code) {
  std::cerr << "error class=" << cls << " msg=" << one_line(message) << '\n';
  return code;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw fh::DataError("cannot write '" + path + "'");
  return out;
}

struct TrainArgs {
  std::string features, labels, config, out, diagnostics, label_mode = "auto";
  std::optional<std::uint64_t> seed;
};

int run_train(const TrainArgs& a) {
  fh::TrainConfig config = a.config.empty() ? fh::TrainConfig{} : fh::load_config(a.config);
  if (a.seed) config.seed = *a.seed;
  const fh::FeatureMatrix features = fh::load_features(a.features);
  const fh::Labels labels = fh::load_labels(a.labels, fh::parse_label_mode(a.label_mode));
  if (labels.size() != features.rows()) {
    throw fh::DataError("label count " + std::to_string(labels.size()) +
                        " does not match feature rows " + std::to_string(features.rows()));
  }
  fh::SimilarityReport report;
  const fh::SimilarityGraph sim = fh::build_training_graph(labels, config, &report);
  if (report.without_similar > 0) {
    std::cerr << "warning: " << report.without_similar
              << " examples have no similar partner\n";
  }
  fh::log_info("graph: " + std::to_string(report.similar) + " similar, " +
               std::to_string(report.dissimilar) + " dissimilar pairs");
  const fh::TrainResult result = fh::train(features, sim, config);
  fh::save_model(result.model, a.out);
  const std::string diag_path = a.diagnostics.empty() ? a.out + ".diag.csv" : a.diagnostics;
  auto diag = open_output(diag_path);
  fh::write_diagnostics_csv(diag, result.diagnostics);
  std::cout << "model " << a.out << " bits=" << result.model.bits() << " n=" << features.rows()
            << " pairs=" << sim.pair_count() << " diagnostics=" << diag_path << '\n';
  return kExitOk;
}

struct EncodeArgs {
  std::string model, features, out;
  unsigned threads = 1;
};

int run_encode(const EncodeArgs& a) {
  const fh::HashModel model = fh::load_model(a.model);
  const fh::FeatureMatrix features = fh::load_features(a.features);
  const fh::BitMatrix codes = fh::encode(model, features, a.threads);
  fh::save_codes(codes, a.out);
  std::cout << "codes " << a.out << " bits=" << codes.bits() << " n=" << codes.size() << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string db_codes, query_codes, labels, query_labels, label_mode = "auto", csv;
  std::string method = "fasthash";
  std::size_t k = 100;
  std::size_t knn = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

int run_eval(const EvalArgs& a) {
  const fh::BitMatrix db = fh::load_codes(a.db_codes);
  const fh::BitMatrix queries = fh::load_codes(a.query_codes);
  if (db.bits() != queries.bits()) throw fh::DataError("database and query bit lengths differ");
  const fh::LabelMode mode = fh::parse_label_mode(a.label_mode);
  fh::LabelPair labels;
  if (a.query_labels.empty()) {
    labels.db = fh::load_labels(a.labels, mode);
    labels.query = labels.db;
  } else {
    labels = fh::load_label_pair(a.labels, a.query_labels, mode);
  }
  if (labels.db.size() != db.size()) throw fh::DataError("database label count mismatch");
  if (labels.query.size() != queries.size()) throw fh::DataError("query label count mismatch");
  if (db.size() == 0) throw fh::DataError("empty database");

  const fh::RelevanceOracle oracle =
      labels.db.multilabel
          ? fh::RelevanceOracle::multilabel(labels.query.tags, labels.db.tags)
          : fh::RelevanceOracle::multiclass(labels.query.classes, labels.db.classes);
  const std::vector<fh::Ranking> rankings = fh::rank_all(queries, db, 0, a.threads);
  const fh::MetricSummary map = fh::mean_average_precision(rankings, oracle);
  const fh::MetricSummary auc = fh::precision_recall_auc(rankings, oracle);
  std::vector<fh::MetricRow> rows = {
      {"precision@" + std::to_string(a.k), fh::mean_precision_at_k(rankings, oracle, a.k)},
      {"map", map.value},
      {"pr_auc", auc.value},
  };
  if (a.knn > 0) {
    if (labels.db.multilabel) throw fh::UsageError("--knn needs multiclass labels");
    std::size_t errors = 0;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const int predicted = fh::knn_classify(queries.code(q), db, labels.db.classes, a.knn);
      if (predicted != labels.query.classes[q]) ++errors;
    }
    rows.push_back({"knn_error@" + std::to_string(a.knn),
                    queries.size() > 0 ? static_cast<double>(errors) / queries.size() : 0.0});
  }
  rows.push_back({"queries_skipped", static_cast<double>(map.queries_skipped)});
  fh::write_metric_table(std::cout, rows);
  if (!a.csv.empty()) {
    auto out = open_output(a.csv);
    fh::write_metric_csv(out, rows, db.bits(), a.method, a.seed);
  }
  return kExitOk;
}

struct BenchArgs {
  std::string labels, label_mode = "auto", loss = "ksh", csv;
  std::uint64_t seed = 1;
  std::size_t seeds = 1;
  std::size_t max_neighbors = 100;
  int sweeps = 2;
};

int run_bench(const BenchArgs& a) {
  const fh::Labels labels = fh::load_labels(a.labels, fh::parse_label_mode(a.label_mode));
  fh::InferenceBenchOptions options;
  options.loss = fh::parse_loss_kind(a.loss);
  options.sweeps = a.sweeps;
  if (a.sweeps < 1) throw fh::UsageError("--sweeps must be >= 1");
  if (a.seeds < 1) throw fh::UsageError("--seeds must be >= 1");

  std::vector<fh::InferenceBenchRow> all;
  std::size_t wins = 0;
  for (std::size_t s = 0; s < a.seeds; ++s) {
    options.seed = a.seed + s;
    fh::TrainConfig graph_config;
    graph_config.seed = options.seed;
    graph_config.max_neighbors = static_cast<std::uint32_t>(a.max_neighbors);
    const fh::SimilarityGraph sim = fh::build_training_graph(labels, graph_config);
    if (sim.pair_count() == 0) throw fh::DataError("similarity graph has no labelled pairs");
    const auto rows = fh::bench_inference(sim, options);
    double gc = 0.0, spectral = 0.0;
    for (const auto& r : rows) {
      if (r.method == fh::InferenceMethod::kBlockGraphCut) gc = r.normalized;
      if (r.method == fh::InferenceMethod::kSpectral) spectral = r.normalized;
    }
    if (gc <= spectral) ++wins;
    all.insert(all.end(), rows.begin(), rows.end());
  }

  std::cout << "method    seed      objective     normalized   seconds\n";
  for (const auto& r : all) {
    std::cout << std::left << std::setw(10) << fh::to_string(r.method) << std::setw(10) << r.seed
              << std::right << std::setw(12) << std::fixed << std::setprecision(2) << r.objective
              << std::setw(15) << std::setprecision(6) << r.normalized << std::setw(10)
              << std::setprecision(4) << r.seconds << '\n';
  }
  std::cout.unsetf(std::ios::fixed);
  std::cout << "blockgc <= spectral in " << wins << " of " << a.seeds << " seeds\n";
  if (!a.csv.empty()) {
    auto out = open_output(a.csv);
    fh::write_bench_csv(out, all);
  }
  return kExitOk;
}

struct SynthArgs {
  fh::SyntheticOptions options;
  std::string kind = "clusters";
  std::string out;
};

int run_synth(SynthArgs a) {
  a.options.kind = fh::parse_synthetic_kind(a.kind);
  const fh::SyntheticSplit data = fh::make_synthetic(a.options);
  fh::save_features(data.db, a.out + ".db.fhfm");
  fh::save_labels(fh::multiclass_labels(data.db_labels), a.out + ".db.labels");
  fh::save_features(data.query, a.out + ".query.fhfm");
  fh::save_labels(fh::multiclass_labels(data.query_labels), a.out + ".query.labels");
  std::cout << "wrote " << a.out << ".{db,query}.{fhfm,labels} db=" << data.db.rows()
            << " queries=" << data.query.rows() << " dims=" << data.db.dims() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised hashing with graph-cut code inference and boosted trees"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Learn hash functions from features and labels");
  train_cmd->add_option("--features", train.features, "Feature file (FHFM)")->required();
  train_cmd->add_option("--labels", train.labels, "Label file")->required();
  train_cmd->add_option("--config", train.config, "key=value config file");
  train_cmd->add_option("--out", train.out, "Model output path")->required();
  train_cmd->add_option("--diagnostics", train.diagnostics,
                        "Per-bit diagnostics CSV (default: <out>.diag.csv)");
  train_cmd->add_option("--label-mode", train.label_mode, "auto|multiclass|multilabel");
  train_cmd->add_option("--seed", train.seed, "Override the config seed");

  EncodeArgs encode;
  auto* encode_cmd = app.add_subcommand("encode", "Compute binary codes with a trained model");
  encode_cmd->add_option("--model", encode.model, "Model file")->required();
  encode_cmd->add_option("--features", encode.features, "Feature file (FHFM)")->required();
  encode_cmd->add_option("--out", encode.out, "Codes output path (FHBC)")->required();
  encode_cmd->add_option("--threads", encode.threads, "Worker threads");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Hamming-ranking retrieval metrics");
  eval_cmd->add_option("--db-codes", eval.db_codes, "Database codes (FHBC)")->required();
  eval_cmd->add_option("--query-codes", eval.query_codes, "Query codes (FHBC)")->required();
  eval_cmd->add_option("--labels", eval.labels, "Database labels")->required();
  eval_cmd->add_option("--query-labels", eval.query_labels,
                       "Query labels (default: --labels, for query set == database)");
  eval_cmd->add_option("--label-mode", eval.label_mode, "auto|multiclass|multilabel");
  eval_cmd->add_option("--k", eval.k, "Precision cutoff")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--knn", eval.knn, "Also report KNN classification error");
  eval_cmd->add_option("--csv", eval.csv, "Write metrics CSV");
  eval_cmd->add_option("--method", eval.method, "Method name for the CSV");
  eval_cmd->add_option("--seed", eval.seed, "Seed recorded in the CSV");
  eval_cmd->add_option("--threads", eval.threads, "Worker threads");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand(
      "infer-bench", "Compare blockgc, icm and spectral inference on the first bit");
  bench_cmd->add_option("--labels", bench.labels, "Label file")->required();
  bench_cmd->add_option("--label-mode", bench.label_mode, "auto|multiclass|multilabel");
  bench_cmd->add_option("--loss", bench.loss, "ksh|hinge|bre|exph");
  bench_cmd->add_option("--seed", bench.seed, "First seed");
  bench_cmd->add_option("--seeds", bench.seeds, "Number of consecutive seeds");
  bench_cmd->add_option("--sweeps", bench.sweeps, "Block GraphCut / ICM sweeps");
  bench_cmd->add_option("--max-neighbors", bench.max_neighbors, "Similarity sampling cap");
  bench_cmd->add_option("--csv", bench.csv, "Write per-run CSV");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--kind", synth.kind, "clusters|xor");
  synth_cmd->add_option("--db", synth.options.db_count, "Database size");
  synth_cmd->add_option("--queries", synth.options.query_count, "Query count");
  synth_cmd->add_option("--dims", synth.options.dims, "Feature dimension");
  synth_cmd->add_option("--classes", synth.options.classes, "Number of classes");
  synth_cmd->add_option("--noise", synth.options.noise, "Point spread around centres");
  synth_cmd->add_option("--center-scale", synth.options.center_scale, "Centre spread");
  synth_cmd->add_option("--seed", synth.options.seed, "Seed");
  synth_cmd->add_option("--out", synth.out, "Output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kExitUsage);
  }

  if (verbose) fh::set_log_level(fh::LogLevel::kInfo);
  try {
    if (*train_cmd) return run_train(train);
    if (*encode_cmd) return run_encode(encode);
    if (*eval_cmd) return run_eval(eval);
    if (*bench_cmd) return run_bench(bench);
    if (*synth_cmd) return run_synth(synth);
  } catch (const fh::Error& e) {
    return report_error(fh::to_string(e.error_class()), e.what(), exit_code(e.error_class()));
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kExitInternal);
  }
  return kExitUsage;
}
