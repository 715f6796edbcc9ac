#pragma once

#include <vector>

#include "gfanova/rankcore.hpp"
#include "gfanova/types.hpp"

namespace gfanova {

enum class EnvelopeKind { Erl, RankLth };

// Closed per-coordinate band. One-sided envelopes carry -inf / +inf on the
// unbounded side.
struct GlobalEnvelope {
  Vector lower;
  Vector upper;
  double alpha = 0.05;
  std::vector<Index> included;  // 0-based ensemble rows spanning the band
  EnvelopeKind kind = EnvelopeKind::Erl;
  Sidedness sidedness = Sidedness::TwoSided;

  Index dimension() const noexcept { return lower.size(); }
};

struct EnvelopeVerdict {
  bool reject = false;
  std::vector<Index> outside_coordinates;
};

// count / s <= alpha, evaluated exactly like the p-value comparison so the
// critical value and p_erl <= alpha can never disagree through rounding.
inline bool within_level(Index count, Index s, double alpha) {
  return static_cast<double>(count) / static_cast<double>(s) <= alpha;
}

// True when no observed vector can be rejected at this level (alpha * s < 1).
inline bool level_unreachable(Index s, double alpha) { return alpha * static_cast<double>(s) < 1.0; }

// Largest ERL measure value R with #{i : measure_i < R} <= alpha * s.
double erl_critical_value(const ErlMeasures& erl, double alpha);

// Same threshold as a count of strictly preceding rows; rows whose count is
// at least this value form the included set.
Index erl_critical_count(const ErlMeasures& erl, double alpha);

GlobalEnvelope erl_envelope(const Eigen::Ref<const Matrix>& values, const ErlMeasures& erl, double alpha,
                            Sidedness sided);
inline GlobalEnvelope erl_envelope(const TestVectorEnsemble& ensemble, const ErlMeasures& erl, double alpha,
                                   Sidedness sided) {
  return erl_envelope(ensemble.values(), erl, alpha, sided);
}

// l-th smallest / l-th largest value per coordinate, 1 <= l <= floor((s+1)/2).
GlobalEnvelope rank_envelope_lth(const Eigen::Ref<const Matrix>& values, Index l);
inline GlobalEnvelope rank_envelope_lth(const TestVectorEnsemble& ensemble, Index l) {
  return rank_envelope_lth(ensemble.values(), l);
}

// Critical rank of the global rank envelope: max{l : #{i : R_i < l} <= alpha s}.
Index global_rank_critical_level(const Vector& extreme_ranks, double alpha);

EnvelopeVerdict envelope_verdict(const GlobalEnvelope& env, const Eigen::Ref<const Vector>& observed);

}  // namespace gfanova
