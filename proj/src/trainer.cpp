#include "fasthash/trainer.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <ostream>
#include <string>
#include <variant>

#include "fasthash/binary_io.hpp"
#include "fasthash/error.hpp"
#include "fasthash/inference.hpp"
#include "fasthash/log.hpp"
#include "fasthash/parallel.hpp"
#include "fasthash/random.hpp"

namespace fasthash {

InferenceMethod parse_inference_method(std::string_view name) {
  if (name == "blockgc") return InferenceMethod::kBlockGraphCut;
  if (name == "icm") return InferenceMethod::kIcm;
  if (name == "spectral") return InferenceMethod::kSpectral;
  throw UsageError("unknown inference method '" + std::string(name) +
                   "' (expected blockgc|icm|spectral)");
}

std::string_view to_string(InferenceMethod method) {
  switch (method) {
    case InferenceMethod::kBlockGraphCut: return "blockgc";
    case InferenceMethod::kIcm: return "icm";
    case InferenceMethod::kSpectral: return "spectral";
  }
  return "?";
}

LearnerKind parse_learner_kind(std::string_view name) {
  if (name == "tree") return LearnerKind::kTree;
  if (name == "linear") return LearnerKind::kLinear;
  throw UsageError("unknown learner '" + std::string(name) + "' (expected tree|linear)");
}

std::string_view to_string(LearnerKind learner) {
  return learner == LearnerKind::kTree ? "tree" : "linear";
}

void validate(const TrainConfig& c) {
  auto fraction_ok = [](double f) { return f >= 0.0 && f < 1.0; };
  if (c.bits < 1) throw UsageError("config: bits must be >= 1");
  if (c.sweeps < 1) throw UsageError("config: sweeps must be >= 1");
  if (c.tree_depth < 1 || c.tree_depth > 16) throw UsageError("config: tree_depth must be in [1, 16]");
  if (c.rounds < 1) throw UsageError("config: rounds must be >= 1");
  if (!fraction_ok(c.trim_fraction)) throw UsageError("config: trim_fraction must be in [0, 1)");
  if (!fraction_ok(c.lazy_fraction)) throw UsageError("config: lazy_fraction must be in [0, 1)");
  if (!fraction_ok(c.init_flip_fraction)) {
    throw UsageError("config: init_flip_fraction must be in [0, 1)");
  }
  if (c.max_neighbors < 1) throw UsageError("config: max_neighbors must be >= 1");
  if (!(c.linear_reg > 0.0)) throw UsageError("config: linear_reg must be positive");
  if (c.linear_epochs < 1) throw UsageError("config: linear_epochs must be >= 1");
}

namespace {

enum Stream : std::uint64_t {
  kStreamBlocks = 1,
  kStreamInit = 2,
  kStreamInference = 3,
  kStreamLearner = 4,
  kStreamSpectral = 5,
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SignVector initial_codes(const BqpInstance& bqp, const TrainConfig& config, std::uint32_t bit,
                         const SignVector& previous) {
  const std::size_t n = bqp.size();
  if (bit == 1) {
    if (config.inference != InferenceMethod::kSpectral && n >= 2 &&
        n <= config.spectral_init_limit) {
      SpectralOptions options;
      options.refine_iters = static_cast<int>(config.spectral_refine_iters);
      options.seed = mix_seed(config.seed, kStreamInit, bit);
      return spectral_bit(bqp, options).z;
    }
    return random_signs(n, mix_seed(config.seed, kStreamInit, bit));
  }
  SignVector z = previous;
  Rng rng(mix_seed(config.seed, kStreamInit, bit));
  std::bernoulli_distribution flip(config.init_flip_fraction);
  for (auto& v : z) {
    if (flip(rng)) v = static_cast<std::int8_t>(-v);
  }
  return z;
}

}  // namespace

TrainResult train(const FeatureMatrix& features, const SimilarityGraph& sim,
                  const TrainConfig& config, bool verify_distances) {
  validate(config);
  const std::size_t n = features.rows();
  if (sim.size() != n) {
    throw ContractViolation("train: similarity graph has " + std::to_string(sim.size()) +
                            " examples, features have " + std::to_string(n));
  }
  if (sim.pair_count() == 0) throw DataError("train: similarity graph has no labelled pairs");

  TrainResult result;
  HashModel& model = result.model;
  model.dimension = static_cast<std::uint32_t>(features.dims());
  model.config = config;
  const QuantizedFeatures q = quantize(features);
  model.quantizer = q.quantizer();
  result.codes = BitMatrix(config.bits, n);

  BlockCover cover;
  if (config.inference == InferenceMethod::kBlockGraphCut) {
    cover = build_blocks(sim, mix_seed(config.seed, kStreamBlocks));
    log_info("train: " + std::to_string(cover.blocks.size()) + " blocks over " +
             std::to_string(n) + " examples");
  }

  const auto& pairs = sim.pairs();
  std::vector<std::uint32_t> prev_distance(pairs.size(), 0);
  SignVector previous;

  for (std::uint32_t bit = 1; bit <= config.bits; ++bit) {
    const auto start = std::chrono::steady_clock::now();
    BitDiagnostics diag;
    diag.bit = bit;
    const BqpInstance bqp =
        BqpInstance::from_graph(sim, config.loss, static_cast<int>(bit), prev_distance);

    const SignVector init = initial_codes(bqp, config, bit, previous);
    diag.objective_init = bqp.objective(init);

    SignVector inferred;
    switch (config.inference) {
      case InferenceMethod::kBlockGraphCut: {
        BlockGraphCutOptions options;
        options.sweeps = static_cast<int>(config.sweeps);
        options.seed = mix_seed(config.seed, kStreamInference, bit);
        inferred = block_graphcut_bit(bqp, cover, init, options);
        break;
      }
      case InferenceMethod::kIcm:
        inferred = icm_bit(bqp, init, static_cast<int>(config.sweeps),
                           mix_seed(config.seed, kStreamInference, bit));
        break;
      case InferenceMethod::kSpectral: {
        SpectralOptions options;
        options.refine_iters = static_cast<int>(config.spectral_refine_iters);
        options.seed = mix_seed(config.seed, kStreamSpectral, bit);
        inferred = spectral_bit(bqp, options).z;
        break;
      }
    }
    diag.objective_inferred = bqp.objective(inferred);
    const double scale = bqp.abs_sum();
    diag.normalized_inferred = scale > 0.0 ? diag.objective_inferred / scale : 0.0;

    SignVector outputs(n);
    try {
      if (config.learner == LearnerKind::kTree) {
        BoostOptions options;
        options.rounds = static_cast<int>(config.rounds);
        options.max_depth = static_cast<int>(config.tree_depth);
        options.trim_fraction = config.trim_fraction;
        options.lazy_fraction = config.lazy_fraction;
        options.seed = mix_seed(config.seed, kStreamLearner, bit);
        BoostedHash h = train_boosted_hash(q, inferred, options);
        for (std::size_t i = 0; i < n; ++i) outputs[i] = static_cast<std::int8_t>(h.evaluate(q.row(i)));
        model.functions.emplace_back(std::move(h));
      } else {
        LinearOptions options;
        options.reg_strength = config.linear_reg;
        options.epochs = static_cast<int>(config.linear_epochs);
        options.seed = mix_seed(config.seed, kStreamLearner, bit);
        LinearHash h = train_linear_hash(features, inferred, options);
        for (std::size_t i = 0; i < n; ++i) {
          outputs[i] = static_cast<std::int8_t>(h.evaluate(features.row(i)));
        }
        model.functions.emplace_back(std::move(h));
      }
    } catch (const Error& e) {
      throw NumericError("train: learner failed on bit " + std::to_string(bit) + ": " + e.what());
    }

    std::size_t disagreements = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (outputs[i] != inferred[i]) ++disagreements;
      result.codes.set(bit - 1, i, outputs[i]);
    }
    diag.classification_error = static_cast<double>(disagreements) / static_cast<double>(n);
    diag.objective_final = bqp.objective(outputs);

    double loss = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (outputs[pairs[k].i] != outputs[pairs[k].j]) ++prev_distance[k];
      loss += loss_value(config.loss, static_cast<int>(bit), pairs[k].y,
                         static_cast<int>(prev_distance[k]));
    }
    diag.loss = loss;

    if (verify_distances) {
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const int recount = hamming_distance(result.codes.code(pairs[k].i),
                                             result.codes.code(pairs[k].j), config.bits);
        if (recount != static_cast<int>(prev_distance[k])) {
          throw NumericError("train: pair distance accumulator drifted at bit " +
                             std::to_string(bit));
        }
      }
    }

    previous = std::move(outputs);
    diag.seconds = seconds_since(start);
    log_info("bit " + std::to_string(bit) + ": objective " + std::to_string(diag.objective_init) +
             " -> " + std::to_string(diag.objective_inferred) + ", fit error " +
             std::to_string(diag.classification_error));
    result.diagnostics.push_back(diag);
  }
  return result;
}

BitMatrix encode(const HashModel& model, const FeatureMatrix& features, unsigned threads) {
  if (features.dims() != model.dimension) {
    throw ContractViolation("encode: features have " + std::to_string(features.dims()) +
                            " dimensions, model expects " + std::to_string(model.dimension));
  }
  const std::size_t n = features.rows();
  const std::size_t m = model.bits();
  const QuantizedFeatures q = quantize(features, model.quantizer);
  std::vector<std::uint64_t> words(words_for_bits(m) * n, 0);
  const std::size_t stride = words_for_bits(m);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t r = 0; r < m; ++r) {
        const auto& fn = model.functions[r];
        const int bit = std::holds_alternative<BoostedHash>(fn)
                            ? std::get<BoostedHash>(fn).evaluate(q.row(i))
                            : std::get<LinearHash>(fn).evaluate(features.row(i));
        if (bit > 0) words[i * stride + r / 64] |= std::uint64_t{1} << (r % 64);
      }
    }
  });
  return BitMatrix::from_words(m, n, std::move(words));
}

void write_diagnostics_csv(std::ostream& out, const std::vector<BitDiagnostics>& diagnostics) {
  out << "bit,objective_init,objective_inferred,objective_final,normalized_inferred,"
         "classification_error,loss,seconds\n";
  out.precision(17);
  for (const auto& d : diagnostics) {
    out << d.bit << ',' << d.objective_init << ',' << d.objective_inferred << ','
        << d.objective_final << ',' << d.normalized_inferred << ',' << d.classification_error
        << ',' << d.loss << ',' << d.seconds << '\n';
  }
}

namespace {

constexpr std::string_view kModelMagic = "FHSH";
constexpr std::uint32_t kTagTreeEnsemble = 0;
constexpr std::uint32_t kTagLinear = 1;
constexpr int kMaxStoredDepth = 20;

void write_config(ByteWriter& w, const TrainConfig& c) {
  w.u32(c.bits);
  w.u32(static_cast<std::uint32_t>(c.loss));
  w.u32(static_cast<std::uint32_t>(c.inference));
  w.u32(c.sweeps);
  w.u32(static_cast<std::uint32_t>(c.learner));
  w.u32(c.tree_depth);
  w.u32(c.rounds);
  w.f64(c.trim_fraction);
  w.f64(c.lazy_fraction);
  w.u64(c.seed);
  w.u32(c.max_neighbors);
  w.f64(c.linear_reg);
  w.u32(c.linear_epochs);
  w.u32(c.spectral_init_limit);
  w.f64(c.init_flip_fraction);
  w.u32(c.spectral_refine_iters);
}

TrainConfig read_config(ByteReader& r) {
  TrainConfig c;
  c.bits = r.u32();
  const std::uint32_t loss = r.u32();
  const std::uint32_t inference = r.u32();
  c.sweeps = r.u32();
  const std::uint32_t learner = r.u32();
  c.tree_depth = r.u32();
  c.rounds = r.u32();
  c.trim_fraction = r.f64();
  c.lazy_fraction = r.f64();
  c.seed = r.u64();
  c.max_neighbors = r.u32();
  c.linear_reg = r.f64();
  c.linear_epochs = r.u32();
  c.spectral_init_limit = r.u32();
  c.init_flip_fraction = r.f64();
  c.spectral_refine_iters = r.u32();
  if (loss > 3 || inference > 2 || learner > 1) {
    throw CorruptHeaderError("model: invalid enumeration in config snapshot");
  }
  c.loss = static_cast<LossKind>(loss);
  c.inference = static_cast<InferenceMethod>(inference);
  c.learner = static_cast<LearnerKind>(learner);
  return c;
}

void write_tree(ByteWriter& w, const Tree& tree) {
  w.u32(static_cast<std::uint32_t>(tree.depth()));
  for (const auto& node : tree.nodes()) {
    w.u8(node.leaf ? 1 : 0);
    w.i8(node.output);
    w.u32(node.split.dim);
    w.u8(node.split.threshold_bin);
    w.i8(node.split.polarity);
  }
}

Tree read_tree(ByteReader& r, std::uint32_t dimension) {
  const std::uint32_t depth = r.u32();
  if (depth > kMaxStoredDepth) throw FormatError("model: tree depth out of range");
  const std::size_t count = (std::size_t{1} << (depth + 1)) - 1;
  constexpr std::size_t kNodeBytes = 8;
  r.need(count * kNodeBytes);
  std::vector<TreeNode> nodes(count);
  for (auto& node : nodes) {
    const std::uint8_t leaf = r.u8();
    node.output = r.i8();
    node.split.dim = r.u32();
    node.split.threshold_bin = r.u8();
    node.split.polarity = r.i8();
    if (leaf > 1) throw FormatError("model: bad leaf flag");
    node.leaf = leaf == 1;
    if (!node.leaf && node.split.dim >= dimension) throw FormatError("model: split dimension");
  }
  try {
    return Tree(static_cast<int>(depth), std::move(nodes));
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("model: invalid tree: ") + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const HashModel& model) {
  ByteWriter w;
  w.bytes(kModelMagic);
  w.u32(HashModel::kFormatVersion);
  write_config(w, model.config);
  w.u32(model.dimension);
  if (model.quantizer.dims() != model.dimension) {
    throw ContractViolation("serialize_model: edge table dimension mismatch");
  }
  for (const auto& edges : model.quantizer.table()) {
    for (double e : edges) w.f64(e);
  }
  w.u32(static_cast<std::uint32_t>(model.functions.size()));
  for (const auto& fn : model.functions) {
    if (const auto* boosted = std::get_if<BoostedHash>(&fn)) {
      w.u32(kTagTreeEnsemble);
      w.u32(boosted->dimension);
      w.u32(static_cast<std::uint32_t>(boosted->trees.size()));
      for (const auto& tree : boosted->trees) write_tree(w, tree);
      for (double weight : boosted->weights) w.f64(weight);
    } else {
      const auto& linear = std::get<LinearHash>(fn);
      w.u32(kTagLinear);
      w.u32(static_cast<std::uint32_t>(linear.w.size()));
      for (double v : linear.w) w.f64(v);
      w.f64(linear.b);
    }
  }
  return w.release();
}

HashModel deserialize_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "model");
  if (bytes.size() < kModelMagic.size()) throw TruncatedFileError("model: file is truncated");
  if (r.bytes(kModelMagic.size()) != kModelMagic) {
    throw CorruptHeaderError("model: bad magic (expected \"FHSH\")");
  }
  const std::uint32_t version = r.u32();
  if (version != HashModel::kFormatVersion) {
    throw VersionMismatchError("model: format version " + std::to_string(version) +
                               " is not supported (expected " +
                               std::to_string(HashModel::kFormatVersion) + ")");
  }
  HashModel model;
  model.config = read_config(r);
  model.dimension = r.u32();
  r.need(static_cast<std::size_t>(model.dimension) * kNumEdges * 8);
  std::vector<std::array<double, kNumEdges>> edges(model.dimension);
  for (auto& row : edges) {
    for (double& e : row) e = r.f64();
  }
  try {
    model.quantizer = Quantizer(std::move(edges));
  } catch (const DataError& e) {
    throw FormatError(std::string("model: ") + e.what());
  }

  const std::uint32_t count = r.u32();
  r.need(static_cast<std::size_t>(count) * 8);
  for (std::uint32_t f = 0; f < count; ++f) {
    const std::uint32_t tag = r.u32();
    if (tag == kTagTreeEnsemble) {
      BoostedHash h;
      h.dimension = r.u32();
      if (h.dimension != model.dimension) throw FormatError("model: function dimension mismatch");
      const std::uint32_t trees = r.u32();
      if (trees == 0) throw FormatError("model: empty tree ensemble");
      r.need(static_cast<std::size_t>(trees) * 12);
      for (std::uint32_t t = 0; t < trees; ++t) h.trees.push_back(read_tree(r, h.dimension));
      for (std::uint32_t t = 0; t < trees; ++t) {
        const double weight = r.f64();
        if (!(weight >= 0.0) || !std::isfinite(weight)) throw FormatError("model: bad tree weight");
        h.weights.push_back(weight);
      }
      model.functions.emplace_back(std::move(h));
    } else if (tag == kTagLinear) {
      LinearHash h;
      const std::uint32_t d = r.u32();
      if (d != model.dimension) throw FormatError("model: function dimension mismatch");
      r.need(static_cast<std::size_t>(d) * 8 + 8);
      h.w.resize(d);
      for (double& v : h.w) v = r.f64();
      h.b = r.f64();
      model.functions.emplace_back(std::move(h));
    } else {
      throw FormatError("model: unknown function record tag " + std::to_string(tag));
    }
  }
  if (!r.at_end()) throw FormatError("model: trailing bytes after last record");
  if (model.functions.size() != model.config.bits) {
    throw FormatError("model: function count does not match configured bit count");
  }
  return model;
}

void save_model(const HashModel& model, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_model(model));
}

HashModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_file_bytes(path));
}

}  // namespace fasthash
