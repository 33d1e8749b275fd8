#include <random>

#include "doctest.h"
#include "fasthash/core.hpp"
#include "fasthash/error.hpp"
#include "oracles.hpp"

using namespace fasthash;

namespace {

std::vector<std::uint64_t> code(std::initializer_list<int> values) {
  const std::vector<int> v(values);
  return pack_code(v);
}

}  // namespace

TEST_CASE("hamming distance and affinity on hand examples") {
  CHECK(hamming_distance(code({1, 1, -1}), code({1, -1, -1}), 3) == 1);
  CHECK(hamming_distance(code({1, -1, 1, 1, -1}), code({1, -1, 1, 1, -1}), 5) == 0);
  CHECK(hamming_distance(code({1, 1, 1, 1}), code({-1, -1, -1, -1}), 4) == 4);
  CHECK(hamming_affinity(code({1, -1, 1, 1, -1}), code({1, -1, 1, 1, -1}), 5) == 5);
  CHECK(hamming_affinity(code({1, -1}), code({-1, 1}), 2) == -2);
  CHECK(hamming_affinity(code({1, 1, -1}), code({1, -1, -1}), 3) == 1);
}

TEST_CASE("hamming distance rejects length mismatch") {
  const auto a = code({1, 1, -1});
  const std::vector<std::uint64_t> two_words(2, 0);
  CHECK_THROWS_AS(hamming_distance(a, two_words, 3), ContractViolation);
  CHECK_THROWS_AS(hamming_affinity(a, two_words, 3), ContractViolation);
}

TEST_CASE("packed distance matches a per-bit loop on random codes") {
  std::mt19937_64 rng(7);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng() % 150;
    std::vector<int> a(m), b(m);
    for (std::size_t r = 0; r < m; ++r) {
      a[r] = coin(rng) ? 1 : -1;
      b[r] = coin(rng) ? 1 : -1;
    }
    const int d = hamming_distance(pack_code(a), pack_code(b), m);
    CHECK(d == oracle::hamming(a, b));
    CHECK(hamming_affinity(pack_code(a), pack_code(b), m) == static_cast<int>(m) - 2 * d);
  }
}

TEST_CASE("BitMatrix stores signs column-major with zero padding") {
  BitMatrix codes(70, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t r = 0; r < 70; ++r) CHECK(codes.get(r, j) == -1);
  }
  codes.set(69, 1, 1);
  codes.set(0, 2, 1);
  CHECK(codes.get(69, 1) == 1);
  CHECK(codes.get(0, 2) == 1);
  CHECK(codes.words_per_code() == 2);
  CHECK(codes.code(1)[1] == (std::uint64_t{1} << 5));
  CHECK_THROWS_AS(codes.set(0, 0, 0), ContractViolation);
  CHECK_THROWS_AS(codes.get(70, 0), ContractViolation);

  std::vector<std::uint64_t> words = codes.words();
  CHECK(BitMatrix::from_words(70, 3, words) == codes);
  words[1] |= std::uint64_t{1} << 63;  // padding bit of column 0
  CHECK_THROWS_AS(BitMatrix::from_words(70, 3, words), DataError);
}

TEST_CASE("similarity graph is symmetric and validated") {
  SimilarityGraph g(4, {{2, 0, 1}, {1, 3, -1}, {0, 1, -1}});
  CHECK(g.pair_count() == 3);
  CHECK(g.sign(0, 2) == 1);
  CHECK(g.sign(2, 0) == 1);
  CHECK(g.sign(3, 1) == -1);
  CHECK(g.sign(2, 3) == 0);
  CHECK(g.pairs().front().i == 0);
  CHECK(g.pairs().front().j == 1);
  for (std::size_t i = 0; i < 4; ++i) {
    for (const auto& nb : g.neighbors(i)) {
      CHECK(g.sign(nb.index, i) == nb.sign);
      const auto& p = g.pairs()[nb.pair];
      CHECK(((p.i == i && p.j == nb.index) || (p.j == i && p.i == nb.index)));
    }
  }
  CHECK_THROWS_AS(SimilarityGraph(3, {{0, 0, 1}}), ContractViolation);
  CHECK_THROWS_AS(SimilarityGraph(3, {{0, 1, 1}, {1, 0, -1}}), ContractViolation);
  CHECK_THROWS_AS(SimilarityGraph(3, {{0, 3, 1}}), ContractViolation);
  CHECK_THROWS_AS(SimilarityGraph(3, {{0, 1, 0}}), ContractViolation);
}

TEST_CASE("feature matrix rejects non-finite values") {
  CHECK_THROWS_AS(FeatureMatrix(1, 2, {1.0f, std::numeric_limits<float>::quiet_NaN()}), DataError);
  CHECK_THROWS_AS(FeatureMatrix(1, 2, {1.0f, std::numeric_limits<float>::infinity()}), DataError);
  CHECK_THROWS_AS(FeatureMatrix(2, 2, {1.0f}), ContractViolation);
}

TEST_CASE("quantization endpoints, constant dimensions and linear edges") {
  const FeatureMatrix x(3, 2, {0.0f, 3.0f, 0.5f, 3.0f, 1.0f, 3.0f});
  const QuantizedFeatures q = quantize(x);
  CHECK(q.at(0, 0) == 0);
  CHECK(q.at(1, 0) == 128);
  CHECK(q.at(2, 0) == 255);
  for (std::size_t i = 0; i < 3; ++i) CHECK(q.at(i, 1) == 0);
  const auto& e = q.quantizer().edges(0);
  for (int k = 0; k < kNumEdges; ++k) CHECK(e[k] == doctest::Approx(k / 256.0).epsilon(1e-15));
}

TEST_CASE("bin boundaries are left-closed and the last bin is closed") {
  const Quantizer quantizer = Quantizer::fit(FeatureMatrix(2, 1, {0.0f, 256.0f}));
  CHECK(quantizer.bin(0, 0.0) == 0);
  CHECK(quantizer.bin(0, 0.999) == 0);
  CHECK(quantizer.bin(0, 1.0) == 1);
  CHECK(quantizer.bin(0, 254.5) == 254);
  CHECK(quantizer.bin(0, 255.0) == 255);
  CHECK(quantizer.bin(0, 256.0) == 255);
  CHECK(quantizer.bin(0, -5.0) == 0);
  CHECK(quantizer.bin(0, 1e9) == 255);
}

TEST_CASE("quantization is monotone and test values are clamped") {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> gauss(0.0f, 2.0f);
  std::vector<float> train(400);
  for (float& v : train) v = gauss(rng);
  const QuantizedFeatures fitted = quantize(FeatureMatrix(200, 2, train));
  std::vector<double> values;
  for (int k = -500; k <= 500; ++k) values.push_back(k * 0.02);
  for (std::size_t dim = 0; dim < 2; ++dim) {
    for (std::size_t k = 1; k < values.size(); ++k) {
      CHECK(fitted.quantizer().bin(dim, values[k - 1]) <= fitted.quantizer().bin(dim, values[k]));
    }
  }
  const QuantizedFeatures test =
      quantize(FeatureMatrix(2, 2, {-100.0f, 0.0f, 100.0f, 0.0f}), fitted.quantizer());
  CHECK(test.clamped() == 2);
  CHECK(test.at(0, 0) == 0);
  CHECK(test.at(1, 0) == 255);
  CHECK_THROWS_AS(quantize(FeatureMatrix(1, 3, {0.0f, 0.0f, 0.0f}), fitted.quantizer()),
                  ContractViolation);
}
