#pragma once

// Pairwise hashing losses and their per-bit reduction to a quadratic term.
//
// All four losses depend only on the Hamming distance of a pair, so the loss
// of bit r conditioned on the previous r-1 bits takes just two values: l11
// when the two current bits agree and l_neg11 when they differ. Writing
//   l(z1, z2) = 1/2 * z1 * z2 * (l11 - l_neg11) + 1/2 * (l11 + l_neg11)
// turns the per-bit problem into a binary quadratic program.

#include <string_view>

namespace fasthash {

enum class LossKind { kKsh, kHinge, kBre, kExpH };

// Lowercase config names: ksh | hinge | bre | exph.
LossKind parse_loss_kind(std::string_view name);
std::string_view to_string(LossKind kind);

inline constexpr LossKind kAllLossKinds[] = {LossKind::kKsh, LossKind::kHinge, LossKind::kBre,
                                             LossKind::kExpH};

// Conditioning state of one labelled pair while solving bit r (1-based).
// The effective bit length used inside the loss is r.
struct PairState {
  int y = 1;
  int prev_distance = 0;  // Hamming distance over bits 1..r-1
  int r = 1;

  int prev_affinity() const { return (r - 1) - 2 * prev_distance; }
};

void validate(const PairState& state);

// Loss of a pair with label y at Hamming distance d over m bits.
//   KSH:   (m*y - (m - 2d))^2
//   Hinge: d^2 if y > 0, max(m/2 - d, 0)^2 if y < 0
//   BRE:   (m*[y < 0] - d)^2
//   ExpH:  exp(y*d/m + [y < 0])
double loss_value(LossKind kind, int m, int y, int d);

struct BitLossTerms {
  double l11 = 0.0;      // current bits identical
  double l_neg11 = 0.0;  // current bits differ
};

BitLossTerms bit_loss_terms(LossKind kind, const PairState& state);

// l11 - l_neg11: the coefficient a_ij of z_i * z_j in the per-bit BQP.
// Non-positive for every similar pair, which is what makes blocks of
// non-dissimilar examples submodular.
double pair_coefficient(LossKind kind, const PairState& state);

}  // namespace fasthash
