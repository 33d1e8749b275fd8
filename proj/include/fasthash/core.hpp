#pragma once

// Shared data types: packed binary codes, the pairwise similarity graph,
// dense feature matrices and their 256-bin quantization.
//
// Code values are {-1,+1} at the API level. Internally a stored bit b maps to
// z = 2b - 1, so bit 1 is +1 and bit 0 is -1.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fasthash {

inline constexpr int kNumBins = 256;
inline constexpr int kNumEdges = kNumBins + 1;

// One bit per example, values in {-1,+1}.
using SignVector = std::vector<std::int8_t>;

// m x n matrix of binary codes, one column per example. Columns are packed
// into 64-bit words and stored contiguously; padding bits past m are zero.
class BitMatrix {
 public:
  BitMatrix() = default;
  // All entries start at -1.
  BitMatrix(std::size_t bits, std::size_t count);

  // Rebuilds a matrix from packed words; rejects nonzero padding bits.
  static BitMatrix from_words(std::size_t bits, std::size_t count,
                              std::vector<std::uint64_t> words);

  std::size_t bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return count_; }
  std::size_t words_per_code() const noexcept { return words_per_code_; }

  int get(std::size_t bit, std::size_t column) const;
  void set(std::size_t bit, std::size_t column, int value);

  std::span<const std::uint64_t> code(std::size_t column) const;
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  bool operator==(const BitMatrix&) const = default;

 private:
  std::size_t bits_ = 0;
  std::size_t count_ = 0;
  std::size_t words_per_code_ = 0;
  std::vector<std::uint64_t> words_;
};

constexpr std::size_t words_for_bits(std::size_t bits) { return (bits + 63) / 64; }

// Packs a {-1,+1} vector into the BitMatrix column layout.
std::vector<std::uint64_t> pack_code(std::span<const int> values);

// Number of differing bits. Both spans must hold exactly words_for_bits(m) words.
int hamming_distance(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                     std::size_t m);

// Inner product of two codes, m - 2 * hamming_distance.
int hamming_affinity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                     std::size_t m);

struct SimilarPair {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::int8_t y = 0;  // +1 similar, -1 dissimilar
};

struct Neighbor {
  std::uint32_t index = 0;
  std::int8_t sign = 0;
  std::uint32_t pair = 0;  // position in SimilarityGraph::pairs()
};

// Sparse symmetric pairwise labels. Pairs absent from the graph have y = 0.
class SimilarityGraph {
 public:
  SimilarityGraph() = default;
  // Pairs may be given in either orientation; they are stored with i < j and
  // sorted. Self pairs, duplicates, out-of-range indices and signs other than
  // +-1 are rejected.
  SimilarityGraph(std::size_t n, std::vector<SimilarPair> pairs);

  std::size_t size() const noexcept { return n_; }
  std::size_t pair_count() const noexcept { return pairs_.size(); }
  const std::vector<SimilarPair>& pairs() const noexcept { return pairs_; }
  std::span<const Neighbor> neighbors(std::size_t i) const;

  // y_ij in {-1, 0, +1}.
  int sign(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_ = 0;
  std::vector<SimilarPair> pairs_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
};

// Dense n x d real matrix, row per example.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t dims, std::vector<float> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dims() const noexcept { return dims_; }
  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dims_, dims_};
  }
  float at(std::size_t i, std::size_t k) const { return values_[i * dims_ + k]; }
  const std::vector<float>& values() const noexcept { return values_; }

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dims_ = 0;
  std::vector<float> values_;
};

// Per-dimension linear bin edges: edge_k = min + k * (max - min) / 256.
// Bin k covers [edge_k, edge_{k+1}); the last bin is closed on the right.
// Values outside [min, max] clamp to the first or last bin.
class Quantizer {
 public:
  Quantizer() = default;
  explicit Quantizer(std::vector<std::array<double, kNumEdges>> edges);

  static Quantizer fit(const FeatureMatrix& features);

  std::size_t dims() const noexcept { return edges_.size(); }
  const std::array<double, kNumEdges>& edges(std::size_t dim) const { return edges_[dim]; }
  const std::vector<std::array<double, kNumEdges>>& table() const noexcept { return edges_; }

  std::uint8_t bin(std::size_t dim, double value) const;

  bool operator==(const Quantizer&) const = default;

 private:
  std::vector<std::array<double, kNumEdges>> edges_;
};

// n x d matrix of 8-bit bin indices (row-major) plus the edge table used.
class QuantizedFeatures {
 public:
  QuantizedFeatures() = default;
  QuantizedFeatures(std::size_t rows, Quantizer quantizer, std::vector<std::uint8_t> bins,
                    std::size_t clamped);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dims() const noexcept { return quantizer_.dims(); }
  std::span<const std::uint8_t> row(std::size_t i) const {
    return {bins_.data() + i * dims(), dims()};
  }
  std::uint8_t at(std::size_t i, std::size_t k) const { return bins_[i * dims() + k]; }
  const Quantizer& quantizer() const noexcept { return quantizer_; }
  // Count of values that fell outside the fitted range and were clamped.
  std::size_t clamped() const noexcept { return clamped_; }

 private:
  std::size_t rows_ = 0;
  Quantizer quantizer_;
  std::vector<std::uint8_t> bins_;
  std::size_t clamped_ = 0;
};

// Fits edges on `features` and bins them.
QuantizedFeatures quantize(const FeatureMatrix& features);

// Bins `features` with an existing edge table (test-time path).
QuantizedFeatures quantize(const FeatureMatrix& features, const Quantizer& quantizer);

}  // namespace fasthash
