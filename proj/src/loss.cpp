#include "fasthash/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fasthash/error.hpp"

namespace fasthash {

LossKind parse_loss_kind(std::string_view name) {
  if (name == "ksh") return LossKind::kKsh;
  if (name == "hinge") return LossKind::kHinge;
  if (name == "bre") return LossKind::kBre;
  if (name == "exph") return LossKind::kExpH;
  throw UsageError("unknown loss kind '" + std::string(name) + "' (expected ksh|hinge|bre|exph)");
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kKsh: return "ksh";
    case LossKind::kHinge: return "hinge";
    case LossKind::kBre: return "bre";
    case LossKind::kExpH: return "exph";
  }
  return "?";
}

void validate(const PairState& state) {
  if (state.y != 1 && state.y != -1) throw ContractViolation("PairState: y must be +-1");
  if (state.r < 1) throw ContractViolation("PairState: bit index r must be >= 1");
  if (state.prev_distance < 0 || state.prev_distance > state.r - 1) {
    throw ContractViolation("PairState: prev_distance must lie in [0, r-1]");
  }
}

double loss_value(LossKind kind, int m, int y, int d) {
  if (m < 1) throw ContractViolation("loss_value: bit count must be >= 1");
  if (y != 1 && y != -1) throw ContractViolation("loss_value: y must be +-1");
  if (d < 0 || d > m) {
    throw ContractViolation("loss_value: distance " + std::to_string(d) + " outside [0, " +
                            std::to_string(m) + "]");
  }
  const double md = m;
  const double dd = d;
  switch (kind) {
    case LossKind::kKsh: {
      const double residual = md * y - (md - 2.0 * dd);
      return residual * residual;
    }
    case LossKind::kHinge: {
      if (y > 0) return dd * dd;
      const double gap = std::max(0.5 * md - dd, 0.0);
      return gap * gap;
    }
    case LossKind::kBre: {
      const double residual = (y < 0 ? md : 0.0) - dd;
      return residual * residual;
    }
    case LossKind::kExpH:
      return std::exp(y * dd / md + (y < 0 ? 1.0 : 0.0));
  }
  throw ContractViolation("loss_value: unknown loss kind");
}

BitLossTerms bit_loss_terms(LossKind kind, const PairState& state) {
  validate(state);
  return {loss_value(kind, state.r, state.y, state.prev_distance),
          loss_value(kind, state.r, state.y, state.prev_distance + 1)};
}

double pair_coefficient(LossKind kind, const PairState& state) {
  const auto terms = bit_loss_terms(kind, state);
  return terms.l11 - terms.l_neg11;
}

}  // namespace fasthash
