#include "fasthash/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "fasthash/error.hpp"
#include "fasthash/log.hpp"

namespace fasthash {

BitMatrix::BitMatrix(std::size_t bits, std::size_t count)
    : bits_(bits),
      count_(count),
      words_per_code_(words_for_bits(bits)),
      words_(words_per_code_ * count, 0) {}

BitMatrix BitMatrix::from_words(std::size_t bits, std::size_t count,
                                std::vector<std::uint64_t> words) {
  BitMatrix out;
  out.bits_ = bits;
  out.count_ = count;
  out.words_per_code_ = words_for_bits(bits);
  if (words.size() != out.words_per_code_ * count) {
    throw ContractViolation("BitMatrix: word count does not match bits x count");
  }
  if (bits % 64 != 0) {
    const std::uint64_t pad_mask = ~((std::uint64_t{1} << (bits % 64)) - 1);
    for (std::size_t c = 0; c < count; ++c) {
      if (words[c * out.words_per_code_ + out.words_per_code_ - 1] & pad_mask) {
        throw DataError("BitMatrix: nonzero padding bits in column " + std::to_string(c));
      }
    }
  }
  out.words_ = std::move(words);
  return out;
}

int BitMatrix::get(std::size_t bit, std::size_t column) const {
  if (bit >= bits_ || column >= count_) throw ContractViolation("BitMatrix::get out of range");
  const std::uint64_t word = words_[column * words_per_code_ + bit / 64];
  return ((word >> (bit % 64)) & 1u) ? 1 : -1;
}

void BitMatrix::set(std::size_t bit, std::size_t column, int value) {
  if (bit >= bits_ || column >= count_) throw ContractViolation("BitMatrix::set out of range");
  if (value != 1 && value != -1) throw ContractViolation("BitMatrix::set value must be +-1");
  std::uint64_t& word = words_[column * words_per_code_ + bit / 64];
  const std::uint64_t mask = std::uint64_t{1} << (bit % 64);
  if (value > 0) {
    word |= mask;
  } else {
    word &= ~mask;
  }
}

std::span<const std::uint64_t> BitMatrix::code(std::size_t column) const {
  if (column >= count_) throw ContractViolation("BitMatrix::code out of range");
  return {words_.data() + column * words_per_code_, words_per_code_};
}

std::vector<std::uint64_t> pack_code(std::span<const int> values) {
  std::vector<std::uint64_t> words(words_for_bits(values.size()), 0);
  for (std::size_t b = 0; b < values.size(); ++b) {
    if (values[b] == 1) {
      words[b / 64] |= std::uint64_t{1} << (b % 64);
    } else if (values[b] != -1) {
      throw ContractViolation("pack_code: values must be +-1");
    }
  }
  return words;
}

int hamming_distance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                     std::size_t m) {
  const std::size_t words = words_for_bits(m);
  if (a.size() != words || b.size() != words) {
    throw ContractViolation("hamming_distance: code length does not match bit count");
  }
  int distance = 0;
  for (std::size_t w = 0; w < words; ++w) distance += std::popcount(a[w] ^ b[w]);
  return distance;
}

int hamming_affinity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                     std::size_t m) {
  return static_cast<int>(m) - 2 * hamming_distance(a, b, m);
}

SimilarityGraph::SimilarityGraph(std::size_t n, std::vector<SimilarPair> pairs)
    : n_(n), pairs_(std::move(pairs)) {
  for (auto& p : pairs_) {
    if (p.i >= n || p.j >= n) throw ContractViolation("SimilarityGraph: index out of range");
    if (p.i == p.j) throw ContractViolation("SimilarityGraph: self pair");
    if (p.y != 1 && p.y != -1) throw ContractViolation("SimilarityGraph: sign must be +-1");
    if (p.i > p.j) std::swap(p.i, p.j);
  }
  std::sort(pairs_.begin(), pairs_.end(), [](const SimilarPair& a, const SimilarPair& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t k = 1; k < pairs_.size(); ++k) {
    if (pairs_[k].i == pairs_[k - 1].i && pairs_[k].j == pairs_[k - 1].j) {
      throw ContractViolation("SimilarityGraph: duplicate pair (" + std::to_string(pairs_[k].i) +
                              ", " + std::to_string(pairs_[k].j) + ")");
    }
  }

  std::vector<std::size_t> degree(n, 0);
  for (const auto& p : pairs_) {
    ++degree[p.i];
    ++degree[p.j];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(offsets_[n]);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto& p = pairs_[k];
    adjacency_[cursor[p.i]++] = {p.j, p.y, static_cast<std::uint32_t>(k)};
    adjacency_[cursor[p.j]++] = {p.i, p.y, static_cast<std::uint32_t>(k)};
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]),
              [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
  }
}

std::span<const Neighbor> SimilarityGraph::neighbors(std::size_t i) const {
  if (i >= n_) throw ContractViolation("SimilarityGraph::neighbors out of range");
  return {adjacency_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

int SimilarityGraph::sign(std::size_t i, std::size_t j) const {
  const auto adj = neighbors(i);
  if (j >= n_) throw ContractViolation("SimilarityGraph::sign out of range");
  auto it = std::lower_bound(adj.begin(), adj.end(), j,
                             [](const Neighbor& nb, std::size_t v) { return nb.index < v; });
  return (it != adj.end() && it->index == j) ? it->sign : 0;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dims, std::vector<float> values)
    : rows_(rows), dims_(dims), values_(std::move(values)) {
  if (values_.size() != rows * dims) {
    throw ContractViolation("FeatureMatrix: value count does not match rows x dims");
  }
  for (float v : values_) {
    if (!std::isfinite(v)) throw DataError("FeatureMatrix: non-finite value");
  }
}

Quantizer::Quantizer(std::vector<std::array<double, kNumEdges>> edges) : edges_(std::move(edges)) {
  for (const auto& e : edges_) {
    for (int k = 1; k < kNumEdges; ++k) {
      if (!(e[k] >= e[k - 1])) throw DataError("Quantizer: edges must be non-decreasing");
    }
  }
}

Quantizer Quantizer::fit(const FeatureMatrix& features) {
  if (features.rows() == 0) throw ContractViolation("quantize: need at least one example");
  std::vector<std::array<double, kNumEdges>> edges(features.dims());
  for (std::size_t k = 0; k < features.dims(); ++k) {
    double lo = features.at(0, k);
    double hi = lo;
    for (std::size_t i = 1; i < features.rows(); ++i) {
      lo = std::min(lo, static_cast<double>(features.at(i, k)));
      hi = std::max(hi, static_cast<double>(features.at(i, k)));
    }
    const double step = (hi - lo) / kNumBins;
    for (int e = 0; e < kNumEdges; ++e) edges[k][e] = lo + e * step;
    edges[k][kNumBins] = hi;
  }
  return Quantizer(std::move(edges));
}

std::uint8_t Quantizer::bin(std::size_t dim, double value) const {
  const auto& e = edges_[dim];
  if (e[kNumBins] == e[0]) return 0;
  // Count interior edges <= value; that is the index of the left-closed bin.
  const auto first = e.begin() + 1;
  const auto last = e.begin() + kNumBins;
  return static_cast<std::uint8_t>(std::upper_bound(first, last, value) - first);
}

QuantizedFeatures::QuantizedFeatures(std::size_t rows, Quantizer quantizer,
                                     std::vector<std::uint8_t> bins, std::size_t clamped)
    : rows_(rows), quantizer_(std::move(quantizer)), bins_(std::move(bins)), clamped_(clamped) {
  if (bins_.size() != rows_ * quantizer_.dims()) {
    throw ContractViolation("QuantizedFeatures: bin count does not match rows x dims");
  }
}

QuantizedFeatures quantize(const FeatureMatrix& features, const Quantizer& quantizer) {
  if (features.dims() != quantizer.dims()) {
    throw ContractViolation("quantize: feature dimension " + std::to_string(features.dims()) +
                            " does not match edge table dimension " +
                            std::to_string(quantizer.dims()));
  }
  const std::size_t d = features.dims();
  std::vector<std::uint8_t> bins(features.rows() * d);
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double v = features.at(i, k);
      const auto& e = quantizer.edges(k);
      if (v < e[0] || v > e[kNumBins]) ++clamped;
      bins[i * d + k] = quantizer.bin(k, v);
    }
  }
  if (clamped > 0) {
    log_info("quantize: clamped " + std::to_string(clamped) + " values outside the fitted range");
  }
  return QuantizedFeatures(features.rows(), quantizer, std::move(bins), clamped);
}

QuantizedFeatures quantize(const FeatureMatrix& features) {
  return quantize(features, Quantizer::fit(features));
}

}  // namespace fasthash
