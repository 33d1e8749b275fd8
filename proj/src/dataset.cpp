#include "fasthash/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "fasthash/binary_io.hpp"
#include "fasthash/error.hpp"
#include "fasthash/log.hpp"
#include "fasthash/random.hpp"

namespace fasthash {

namespace {

constexpr std::string_view kFeatureMagic = "FHFM";
constexpr std::string_view kCodesMagic = "FHBC";

void expect_magic(ByteReader& r, std::span<const std::uint8_t> bytes, std::string_view magic,
                  const std::string& what) {
  if (bytes.size() < magic.size()) throw TruncatedFileError(what + ": file is truncated");
  if (r.bytes(magic.size()) != magic) {
    throw CorruptHeaderError(what + ": bad magic (expected \"" + std::string(magic) + "\")");
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::uint8_t> serialize_features(const FeatureMatrix& features) {
  ByteWriter w;
  w.bytes(kFeatureMagic);
  w.u32(kFeatureFormatVersion);
  w.u32(static_cast<std::uint32_t>(features.rows()));
  w.u32(static_cast<std::uint32_t>(features.dims()));
  for (float v : features.values()) w.f32(v);
  return w.release();
}

FeatureMatrix deserialize_features(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "features");
  expect_magic(r, bytes, kFeatureMagic, "features");
  const std::uint32_t version = r.u32();
  if (version != kFeatureFormatVersion) {
    throw VersionMismatchError("features: format version " + std::to_string(version) +
                               " is not supported");
  }
  const std::size_t n = r.u32();
  const std::size_t d = r.u32();
  r.need(n * d * 4);
  std::vector<float> values(n * d);
  for (float& v : values) v = r.f32();
  if (!r.at_end()) throw FormatError("features: trailing bytes after values");
  return FeatureMatrix(n, d, std::move(values));
}

void save_features(const FeatureMatrix& features, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_features(features));
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  return deserialize_features(read_file_bytes(path));
}

std::vector<std::uint8_t> serialize_codes(const BitMatrix& codes) {
  ByteWriter w;
  w.bytes(kCodesMagic);
  w.u32(static_cast<std::uint32_t>(codes.bits()));
  w.u32(static_cast<std::uint32_t>(codes.size()));
  for (std::uint64_t word : codes.words()) w.u64(word);
  return w.release();
}

BitMatrix deserialize_codes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "codes");
  expect_magic(r, bytes, kCodesMagic, "codes");
  const std::size_t m = r.u32();
  const std::size_t n = r.u32();
  if (m == 0) throw FormatError("codes: zero bit length");
  const std::size_t count = words_for_bits(m) * n;
  r.need(count * 8);
  std::vector<std::uint64_t> words(count);
  for (auto& word : words) word = r.u64();
  if (!r.at_end()) throw FormatError("codes: trailing bytes after columns");
  try {
    return BitMatrix::from_words(m, n, std::move(words));
  } catch (const ContractViolation& e) {
    throw FormatError(std::string("codes: ") + e.what());
  }
}

void save_codes(const BitMatrix& codes, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_codes(codes));
}

BitMatrix load_codes(const std::filesystem::path& path) {
  return deserialize_codes(read_file_bytes(path));
}

LabelMode parse_label_mode(std::string_view name) {
  if (name == "auto") return LabelMode::kAuto;
  if (name == "multiclass") return LabelMode::kMulticlass;
  if (name == "multilabel") return LabelMode::kMultilabel;
  throw UsageError("unknown label mode '" + std::string(name) +
                   "' (expected auto|multiclass|multilabel)");
}

namespace {

class LabelParser {
 public:
  Labels parse(std::istream& in, LabelMode mode) {
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (mode == LabelMode::kAuto) {
      const bool comma = std::any_of(lines.begin(), lines.end(), [](const std::string& l) {
        return l.find(',') != std::string::npos;
      });
      mode = comma ? LabelMode::kMultilabel : LabelMode::kMulticlass;
    }
    Labels out;
    out.multilabel = mode == LabelMode::kMultilabel;
    for (std::size_t k = 0; k < lines.size(); ++k) {
      const std::string_view line = trim(lines[k]);
      if (out.multilabel) {
        out.tags.push_back(parse_tags(line));
      } else {
        out.classes.push_back(parse_class(line, k + 1));
      }
    }
    out.tag_names = names_;
    return out;
  }

  std::vector<std::uint32_t> parse_tags(std::string_view line) {
    std::vector<std::uint32_t> set;
    while (!line.empty()) {
      const auto comma = line.find(',');
      const std::string_view token = trim(line.substr(0, comma));
      if (!token.empty()) {
        auto [it, inserted] = ids_.try_emplace(std::string(token),
                                               static_cast<std::uint32_t>(names_.size()));
        if (inserted) names_.emplace_back(token);
        set.push_back(it->second);
      }
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    return set;
  }

  static int parse_class(std::string_view line, std::size_t line_no) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (line.empty() || ec != std::errc() || ptr != line.data() + line.size()) {
      throw DataError("labels: line " + std::to_string(line_no) + " is not an integer class id");
    }
    return value;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> names_;
};

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

Labels parse_labels(std::istream& in, LabelMode mode) { return LabelParser().parse(in, mode); }

Labels load_labels(const std::filesystem::path& path, LabelMode mode) {
  auto in = open_input(path);
  return parse_labels(in, mode);
}

LabelPair load_label_pair(const std::filesystem::path& db_path,
                          const std::filesystem::path& query_path, LabelMode mode) {
  auto db_in = open_input(db_path);
  auto query_in = open_input(query_path);
  LabelParser parser;
  LabelPair out;
  out.db = parser.parse(db_in, mode);
  const LabelMode resolved = out.db.multilabel ? LabelMode::kMultilabel : LabelMode::kMulticlass;
  out.query = parser.parse(query_in, mode == LabelMode::kAuto ? resolved : mode);
  out.db.tag_names = out.query.tag_names;
  return out;
}

void write_labels(std::ostream& out, const Labels& labels) {
  if (!labels.multilabel) {
    for (int c : labels.classes) out << c << '\n';
    return;
  }
  for (const auto& set : labels.tags) {
    for (std::size_t k = 0; k < set.size(); ++k) {
      if (k > 0) out << ',';
      out << (set[k] < labels.tag_names.size() ? labels.tag_names[set[k]]
                                                : std::to_string(set[k]));
    }
    // A trailing comma keeps short lines recognisable as tag sets.
    if (set.size() <= 1) out << ',';
    out << '\n';
  }
}

void save_labels(const Labels& labels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_labels(out, labels);
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

Labels multiclass_labels(std::vector<int> classes) {
  Labels out;
  out.classes = std::move(classes);
  return out;
}

int label_relation(const Labels& labels, std::size_t i, std::size_t j) {
  if (!labels.multilabel) return labels.classes[i] == labels.classes[j] ? 1 : -1;
  const auto& a = labels.tags[i];
  const auto& b = labels.tags[j];
  std::size_t shared = 0;
  for (auto p = a.begin(), q = b.begin(); p != a.end() && q != b.end();) {
    if (*p < *q) {
      ++p;
    } else if (*q < *p) {
      ++q;
    } else {
      ++shared;
      ++p;
      ++q;
    }
  }
  if (shared >= 2) return 1;
  return shared == 1 ? 0 : -1;
}

SimilarityGraph build_similarity(const Labels& labels, std::size_t max_neighbors,
                                 std::uint64_t seed, SimilarityReport* report) {
  const std::size_t n = labels.size();
  if (max_neighbors == 0) throw UsageError("build_similarity: max_neighbors must be >= 1");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw DataError("too many examples");

  // Keyed by (i << 32 | j) with i < j, so iteration order is deterministic.
  std::map<std::uint64_t, std::int8_t> chosen;
  std::vector<std::uint32_t> similar, dissimilar;
  std::size_t without_similar = 0;
  auto sample = [&](std::vector<std::uint32_t>& pool, std::size_t i, std::int8_t y, Rng& rng) {
    const std::size_t take = std::min(max_neighbors, pool.size());
    for (std::size_t k = 0; k < take; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(rng)]);
      const std::uint64_t a = std::min<std::uint64_t>(i, pool[k]);
      const std::uint64_t b = std::max<std::uint64_t>(i, pool[k]);
      chosen.emplace((a << 32) | b, y);
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    similar.clear();
    dissimilar.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const int rel = label_relation(labels, i, j);
      if (rel > 0) similar.push_back(static_cast<std::uint32_t>(j));
      if (rel < 0) dissimilar.push_back(static_cast<std::uint32_t>(j));
    }
    if (similar.empty()) ++without_similar;
    Rng rng(mix_seed(seed, i));
    sample(similar, i, 1, rng);
    sample(dissimilar, i, -1, rng);
  }
  if (without_similar > 0) {
    log_info("build_similarity: warning: " + std::to_string(without_similar) +
             " examples have no similar partner");
  }

  std::vector<SimilarPair> pairs;
  pairs.reserve(chosen.size());
  SimilarityReport r;
  for (const auto& [key, y] : chosen) {
    pairs.push_back({static_cast<std::uint32_t>(key >> 32),
                     static_cast<std::uint32_t>(key & 0xffffffffULL), y});
    (y > 0 ? r.similar : r.dissimilar)++;
  }
  r.pairs = pairs.size();
  r.without_similar = without_similar;
  if (report != nullptr) *report = r;
  return SimilarityGraph(n, std::move(pairs));
}

SimilarityGraph build_training_graph(const Labels& labels, const TrainConfig& config,
                                     SimilarityReport* report) {
  constexpr std::uint64_t kStreamGraph = 6;
  return build_similarity(labels, config.max_neighbors, mix_seed(config.seed, kStreamGraph),
                          report);
}

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("config: invalid value '" + std::string(text) + "' for key '" +
                     std::string(key) + "'");
  }
  return value;
}

void set_config_key(TrainConfig& c, std::string_view key, std::string_view value) {
  auto u32 = [&] { return parse_number<std::uint32_t>(key, value); };
  auto real = [&] {
    const double v = parse_number<double>(key, value);
    if (!std::isfinite(v)) throw UsageError("config: non-finite value for '" + std::string(key) + "'");
    return v;
  };
  if (key == "bits") c.bits = u32();
  else if (key == "loss") c.loss = parse_loss_kind(value);
  else if (key == "inference") c.inference = parse_inference_method(value);
  else if (key == "sweeps") c.sweeps = u32();
  else if (key == "learner") c.learner = parse_learner_kind(value);
  else if (key == "tree_depth") c.tree_depth = u32();
  else if (key == "rounds") c.rounds = u32();
  else if (key == "trim_fraction") c.trim_fraction = real();
  else if (key == "lazy_fraction") c.lazy_fraction = real();
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "max_neighbors") c.max_neighbors = u32();
  else if (key == "linear_reg") c.linear_reg = real();
  else if (key == "linear_epochs") c.linear_epochs = u32();
  else if (key == "spectral_init_limit") c.spectral_init_limit = u32();
  else if (key == "init_flip_fraction") c.init_flip_fraction = real();
  else if (key == "spectral_refine_iters") c.spectral_refine_iters = u32();
  else throw UsageError("config: unknown key '" + std::string(key) + "'");
}

}  // namespace

TrainConfig parse_config(std::istream& in) {
  TrainConfig config;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config: line " + std::to_string(line_no) + " is not key=value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.emplace(key).second) {
      throw UsageError("config: key '" + std::string(key) + "' is set twice");
    }
    set_config_key(config, key, value);
  }
  validate(config);
  return config;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path.string() + "'");
  return parse_config(in);
}

void write_config(std::ostream& out, const TrainConfig& c) {
  std::ostringstream s;
  s.precision(17);
  s << "bits=" << c.bits << '\n'
    << "loss=" << to_string(c.loss) << '\n'
    << "inference=" << to_string(c.inference) << '\n'
    << "sweeps=" << c.sweeps << '\n'
    << "learner=" << to_string(c.learner) << '\n'
    << "tree_depth=" << c.tree_depth << '\n'
    << "rounds=" << c.rounds << '\n'
    << "trim_fraction=" << c.trim_fraction << '\n'
    << "lazy_fraction=" << c.lazy_fraction << '\n'
    << "seed=" << c.seed << '\n'
    << "max_neighbors=" << c.max_neighbors << '\n'
    << "linear_reg=" << c.linear_reg << '\n'
    << "linear_epochs=" << c.linear_epochs << '\n'
    << "spectral_init_limit=" << c.spectral_init_limit << '\n'
    << "init_flip_fraction=" << c.init_flip_fraction << '\n'
    << "spectral_refine_iters=" << c.spectral_refine_iters << '\n';
  out << s.str();
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "clusters") return SyntheticKind::kClusters;
  if (name == "xor") return SyntheticKind::kXor;
  throw UsageError("unknown synthetic kind '" + std::string(name) + "' (expected clusters|xor)");
}

SyntheticSplit make_synthetic(const SyntheticOptions& o) {
  if (o.classes < 1 || o.dims < 1) throw UsageError("synthetic: classes and dims must be >= 1");
  if (o.db_count < o.classes) throw UsageError("synthetic: need at least one database item per class");
  if (!(o.noise >= 0.0) || !(o.center_scale > 0.0)) {
    throw UsageError("synthetic: noise must be >= 0 and center_scale > 0");
  }
  Rng rng(mix_seed(o.seed, 0));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> centers(o.classes, std::vector<double>(o.dims));
  for (auto& c : centers) {
    for (double& v : c) v = o.center_scale * gauss(rng);
  }

  auto draw = [&](std::size_t count, std::uint64_t stream, FeatureMatrix& features,
                  std::vector<int>& labels) {
    Rng local(mix_seed(o.seed, stream));
    labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) labels[i] = static_cast<int>(i % o.classes);
    std::shuffle(labels.begin(), labels.end(), local);
    std::vector<float> values(count * o.dims);
    std::bernoulli_distribution side(0.5);
    for (std::size_t i = 0; i < count; ++i) {
      const auto& c = centers[static_cast<std::size_t>(labels[i])];
      const double sign = (o.kind == SyntheticKind::kXor && side(local)) ? -1.0 : 1.0;
      for (std::size_t k = 0; k < o.dims; ++k) {
        values[i * o.dims + k] = static_cast<float>(sign * c[k] + o.noise * gauss(local));
      }
    }
    features = FeatureMatrix(count, o.dims, std::move(values));
  };

  SyntheticSplit out;
  draw(o.db_count, 1, out.db, out.db_labels);
  draw(o.query_count, 2, out.query, out.query_labels);
  return out;
}

}  // namespace fasthash
