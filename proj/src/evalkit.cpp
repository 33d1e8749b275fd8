#include "fasthash/evalkit.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>

#include "fasthash/error.hpp"
#include "fasthash/parallel.hpp"

namespace fasthash {

Ranking rank(std::span<const std::uint64_t> query, const BitMatrix& db, std::size_t k) {
  const std::size_t m = db.bits();
  if (query.size() != db.words_per_code()) {
    throw ContractViolation("rank: query code length does not match database bit count");
  }
  const std::size_t n = db.size();
  std::vector<std::uint32_t> distance(n);
  std::vector<std::size_t> bucket_start(m + 2, 0);
  for (std::size_t j = 0; j < n; ++j) {
    distance[j] = static_cast<std::uint32_t>(hamming_distance(query, db.code(j), m));
    ++bucket_start[distance[j] + 1];
  }
  for (std::size_t b = 0; b <= m; ++b) bucket_start[b + 1] += bucket_start[b];
  Ranking out;
  out.indices.resize(n);
  out.distances.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t slot = bucket_start[distance[j]]++;
    out.indices[slot] = static_cast<std::uint32_t>(j);
    out.distances[slot] = distance[j];
  }
  if (k > 0 && k < n) {
    out.indices.resize(k);
    out.distances.resize(k);
  }
  return out;
}

std::vector<Ranking> rank_all(const BitMatrix& queries, const BitMatrix& db, std::size_t k,
                              unsigned threads) {
  if (queries.bits() != db.bits()) throw ContractViolation("rank_all: bit count mismatch");
  std::vector<Ranking> out(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t q = begin; q < end; ++q) out[q] = rank(queries.code(q), db, k);
  });
  return out;
}

RelevanceOracle RelevanceOracle::multiclass(std::vector<int> query_labels,
                                            std::vector<int> db_labels) {
  RelevanceOracle o;
  o.query_labels_ = std::move(query_labels);
  o.db_labels_ = std::move(db_labels);
  return o;
}

RelevanceOracle RelevanceOracle::multilabel(std::vector<std::vector<std::uint32_t>> query_tags,
                                            std::vector<std::vector<std::uint32_t>> db_tags,
                                            std::size_t min_shared) {
  auto check = [](const std::vector<std::vector<std::uint32_t>>& sets) {
    for (const auto& s : sets) {
      if (!std::is_sorted(s.begin(), s.end()) ||
          std::adjacent_find(s.begin(), s.end()) != s.end()) {
        throw ContractViolation("RelevanceOracle: tag lists must be sorted and unique");
      }
    }
  };
  check(query_tags);
  check(db_tags);
  RelevanceOracle o;
  o.multilabel_ = true;
  o.query_tags_ = std::move(query_tags);
  o.db_tags_ = std::move(db_tags);
  o.min_shared_ = min_shared;
  return o;
}

std::size_t RelevanceOracle::query_count() const noexcept {
  return multilabel_ ? query_tags_.size() : query_labels_.size();
}

std::size_t RelevanceOracle::db_count() const noexcept {
  return multilabel_ ? db_tags_.size() : db_labels_.size();
}

bool RelevanceOracle::relevant(std::size_t query, std::size_t db_index) const {
  if (query >= query_count() || db_index >= db_count()) {
    throw ContractViolation("RelevanceOracle: index out of range");
  }
  if (!multilabel_) return query_labels_[query] == db_labels_[db_index];
  const auto& a = query_tags_[query];
  const auto& b = db_tags_[db_index];
  std::size_t shared = 0;
  for (auto i = a.begin(), j = b.begin(); i != a.end() && j != b.end();) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      if (++shared >= min_shared_) return true;
      ++i;
      ++j;
    }
  }
  return false;
}

std::size_t RelevanceOracle::relevant_count(std::size_t query) const {
  std::size_t count = 0;
  for (std::size_t j = 0; j < db_count(); ++j) count += relevant(query, j) ? 1 : 0;
  return count;
}

double precision_at_k(const Ranking& ranking, const RelevanceOracle& oracle, std::size_t query,
                      std::size_t k) {
  if (ranking.size() == 0) throw ContractViolation("precision_at_k: empty database");
  if (k == 0) throw ContractViolation("precision_at_k: K must be >= 1");
  const std::size_t cutoff = std::min(k, ranking.size());
  std::size_t hits = 0;
  for (std::size_t p = 0; p < cutoff; ++p) hits += oracle.relevant(query, ranking.indices[p]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(cutoff);
}

double mean_precision_at_k(std::span<const Ranking> rankings, const RelevanceOracle& oracle,
                           std::size_t k) {
  if (rankings.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t q = 0; q < rankings.size(); ++q) total += precision_at_k(rankings[q], oracle, q, k);
  return total / static_cast<double>(rankings.size());
}

MetricSummary mean_average_precision(std::span<const Ranking> rankings,
                                     const RelevanceOracle& oracle) {
  MetricSummary out;
  double total = 0.0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    const Ranking& r = rankings[q];
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t p = 0; p < r.size(); ++p) {
      if (oracle.relevant(q, r.indices[p])) {
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(p + 1);
      }
    }
    if (hits == 0) {
      ++out.queries_skipped;
      continue;
    }
    total += sum / static_cast<double>(hits);
    ++out.queries_used;
  }
  out.value = out.queries_used > 0 ? total / static_cast<double>(out.queries_used) : 0.0;
  return out;
}

MetricSummary precision_recall_auc(std::span<const Ranking> rankings,
                                   const RelevanceOracle& oracle) {
  MetricSummary out;
  double total = 0.0;
  std::vector<bool> hit;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    const Ranking& r = rankings[q];
    hit.assign(r.size(), false);
    std::size_t relevant = 0;
    for (std::size_t p = 0; p < r.size(); ++p) {
      hit[p] = oracle.relevant(q, r.indices[p]);
      relevant += hit[p] ? 1 : 0;
    }
    if (relevant == 0) {
      ++out.queries_skipped;
      continue;
    }
    double area = 0.0;
    double prev_recall = 0.0;
    double prev_precision = hit[0] ? 1.0 : 0.0;
    std::size_t hits = 0;
    for (std::size_t p = 0; p < r.size(); ++p) {
      hits += hit[p] ? 1 : 0;
      const double recall = static_cast<double>(hits) / static_cast<double>(relevant);
      const double precision = static_cast<double>(hits) / static_cast<double>(p + 1);
      area += (recall - prev_recall) * (precision + prev_precision) * 0.5;
      prev_recall = recall;
      prev_precision = precision;
    }
    total += area;
    ++out.queries_used;
  }
  out.value = out.queries_used > 0 ? total / static_cast<double>(out.queries_used) : 0.0;
  return out;
}

int knn_classify(std::span<const std::uint64_t> query, const BitMatrix& db,
                 std::span<const int> db_labels, std::size_t k) {
  if (db.size() == 0) throw ContractViolation("knn_classify: empty database");
  if (k == 0) throw ContractViolation("knn_classify: K must be >= 1");
  if (db_labels.size() != db.size()) throw ContractViolation("knn_classify: label count");
  const Ranking r = rank(query, db, k);
  std::map<int, std::size_t> votes;
  std::size_t best = 0;
  for (std::uint32_t j : r.indices) best = std::max(best, ++votes[db_labels[j]]);
  for (std::uint32_t j : r.indices) {
    if (votes[db_labels[j]] == best) return db_labels[j];
  }
  return db_labels[r.indices.front()];
}

void write_metric_table(std::ostream& out, std::span<const MetricRow> rows) {
  std::size_t width = 6;
  for (const auto& row : rows) width = std::max(width, row.metric.size());
  out << std::left << std::setw(static_cast<int>(width) + 2) << "metric" << "value\n";
  for (const auto& row : rows) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << row.metric << std::fixed
        << std::setprecision(6) << row.value << '\n';
  }
  out.unsetf(std::ios::fixed);
}

void write_metric_csv(std::ostream& out, std::span<const MetricRow> rows, std::size_t bits,
                      const std::string& method, std::uint64_t seed, bool header) {
  if (header) out << "metric,value,bits,method,seed\n";
  for (const auto& row : rows) {
    out << row.metric << ',' << std::setprecision(17) << row.value << ',' << bits << ','
        << method << ',' << seed << '\n';
  }
}

}  // namespace fasthash
