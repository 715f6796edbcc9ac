#include "gfanova/envelope.hpp"

#include <algorithm>
#include <limits>

namespace gfanova {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
}

}  // namespace

Index erl_critical_count(const ErlMeasures& erl, double alpha) {
  check_alpha(alpha);
  if (erl.size() == 0) throw InvalidInput("empty ERL measures");

  std::vector<Index> counts = erl.preceding_counts();
  std::sort(counts.begin(), counts.end());
  const Index s = erl.size();

  // counts[p] has exactly p entries strictly below it when it starts a run
  Index critical = counts.front();
  for (std::size_t p = 0; p < counts.size(); ++p) {
    if (p > 0 && counts[p] == counts[p - 1]) continue;
    if (!within_level(static_cast<Index>(p), s, alpha)) break;
    critical = counts[p];
  }
  return critical;
}

double erl_critical_value(const ErlMeasures& erl, double alpha) {
  return static_cast<double>(erl_critical_count(erl, alpha)) / static_cast<double>(erl.size());
}

GlobalEnvelope erl_envelope(const Eigen::Ref<const Matrix>& values, const ErlMeasures& erl, double alpha,
                            Sidedness sided) {
  if (erl.size() != values.rows()) throw InvalidInput("ERL measures do not match the ensemble");
  const Index critical = erl_critical_count(erl, alpha);

  GlobalEnvelope env;
  env.alpha = alpha;
  env.kind = EnvelopeKind::Erl;
  env.sidedness = sided;
  for (Index i = 0; i < values.rows(); ++i) {
    if (erl.preceding(i) >= critical) env.included.push_back(i);
  }
  if (env.included.empty()) throw std::logic_error("ERL envelope has no included rows");

  constexpr double inf = std::numeric_limits<double>::infinity();
  const Index d = values.cols();
  env.lower = Vector::Constant(d, inf);
  env.upper = Vector::Constant(d, -inf);
  for (Index i : env.included) {
    env.lower = env.lower.cwiseMin(values.row(i).transpose());
    env.upper = env.upper.cwiseMax(values.row(i).transpose());
  }
  if (sided == Sidedness::LowerExtreme) env.upper.setConstant(inf);
  if (sided == Sidedness::UpperExtreme) env.lower.setConstant(-inf);
  return env;
}

GlobalEnvelope rank_envelope_lth(const Eigen::Ref<const Matrix>& values, Index l) {
  const Index s = values.rows();
  if (l < 1 || l > (s + 1) / 2) throw InvalidInput("rank envelope level out of range");

  GlobalEnvelope env;
  env.kind = EnvelopeKind::RankLth;
  env.sidedness = Sidedness::TwoSided;
  env.alpha = 0.0;  // not tied to a level; see global_rank_critical_level
  env.lower.resize(values.cols());
  env.upper.resize(values.cols());

  std::vector<double> column(static_cast<std::size_t>(s));
  for (Index k = 0; k < values.cols(); ++k) {
    for (Index i = 0; i < s; ++i) column[static_cast<std::size_t>(i)] = values(i, k);
    const auto lth = column.begin() + (l - 1);
    std::nth_element(column.begin(), lth, column.end());
    env.lower(k) = *lth;
    const auto lth_largest = column.begin() + (s - l);
    std::nth_element(column.begin(), lth_largest, column.end());
    env.upper(k) = *lth_largest;
  }
  return env;
}

Index global_rank_critical_level(const Vector& extreme_ranks, double alpha) {
  check_alpha(alpha);
  const Index s = extreme_ranks.size();
  Index level = 1;
  for (Index l = 2; l <= (s + 1) / 2; ++l) {
    const Index below = (extreme_ranks.array() < static_cast<double>(l)).count();
    if (!within_level(below, s, alpha)) break;
    level = l;
  }
  return level;
}

EnvelopeVerdict envelope_verdict(const GlobalEnvelope& env, const Eigen::Ref<const Vector>& observed) {
  if (observed.size() != env.dimension()) throw InvalidInput("observed vector length does not match envelope");
  EnvelopeVerdict verdict;
  for (Index k = 0; k < observed.size(); ++k) {
    if (observed(k) < env.lower(k) || observed(k) > env.upper(k)) verdict.outside_coordinates.push_back(k);
  }
  verdict.reject = !verdict.outside_coordinates.empty();
  return verdict;
}

}  // namespace gfanova
