#pragma once

// Hamming-ranking retrieval metrics and KNN classification over codes.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fasthash/core.hpp"

namespace fasthash {

// Database indices in ascending Hamming distance, ties by ascending index.
struct Ranking {
  std::vector<std::uint32_t> indices;
  std::vector<std::uint32_t> distances;

  std::size_t size() const noexcept { return indices.size(); }
};

// k = 0 ranks the whole database.
Ranking rank(std::span<const std::uint64_t> query, const BitMatrix& db, std::size_t k = 0);

// Full rankings for every column of `queries`.
std::vector<Ranking> rank_all(const BitMatrix& queries, const BitMatrix& db, std::size_t k = 0,
                              unsigned threads = 1);

// relevant(q, j): is database item j a correct answer for query q.
class RelevanceOracle {
 public:
  // Same class id.
  static RelevanceOracle multiclass(std::vector<int> query_labels, std::vector<int> db_labels);
  // At least `min_shared` common tags. Each tag list must be sorted and unique.
  static RelevanceOracle multilabel(std::vector<std::vector<std::uint32_t>> query_tags,
                                    std::vector<std::vector<std::uint32_t>> db_tags,
                                    std::size_t min_shared = 2);

  bool relevant(std::size_t query, std::size_t db_index) const;
  std::size_t query_count() const noexcept;
  std::size_t db_count() const noexcept;
  // Number of relevant database items for a query.
  std::size_t relevant_count(std::size_t query) const;

 private:
  bool multilabel_ = false;
  std::vector<int> query_labels_, db_labels_;
  std::vector<std::vector<std::uint32_t>> query_tags_, db_tags_;
  std::size_t min_shared_ = 2;
};

// (# relevant among the first K) / K. A ranking shorter than K uses its own length.
double precision_at_k(const Ranking& ranking, const RelevanceOracle& oracle, std::size_t query,
                      std::size_t k = 100);

struct MetricSummary {
  double value = 0.0;
  std::size_t queries_used = 0;
  std::size_t queries_skipped = 0;  // no relevant database item
};

// Mean over queries of mean precision at every relevant position.
// rankings[q] must be the full ranking of query q.
MetricSummary mean_average_precision(std::span<const Ranking> rankings,
                                     const RelevanceOracle& oracle);

// Mean over queries of the trapezoidal area under the precision-recall points
// of cutoffs 1..N, with the curve anchored at recall 0 by the first point's precision.
MetricSummary precision_recall_auc(std::span<const Ranking> rankings,
                                   const RelevanceOracle& oracle);

// Mean precision@K over all queries.
double mean_precision_at_k(std::span<const Ranking> rankings, const RelevanceOracle& oracle,
                           std::size_t k = 100);

// Majority label of the K nearest database codes; tied labels resolve to the
// one whose first occurrence is nearest.
int knn_classify(std::span<const std::uint64_t> query, const BitMatrix& db,
                 std::span<const int> db_labels, std::size_t k);

struct MetricRow {
  std::string metric;
  double value = 0.0;
};

// Aligned text table.
void write_metric_table(std::ostream& out, std::span<const MetricRow> rows);
// CSV columns: metric,value,bits,method,seed
void write_metric_csv(std::ostream& out, std::span<const MetricRow> rows, std::size_t bits,
                      const std::string& method, std::uint64_t seed, bool header = true);

}  // namespace fasthash
