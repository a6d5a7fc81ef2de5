#pragma once

// Truncation schedules, tolerances and the three-way Verdict.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "dsum/seqcore.hpp"

namespace dsum {

struct ToleranceConfig {
  Scalar decision_tol = 1e-3;
  Scalar exact_tol = 1e-9;
  Scalar trend_ratio = 0.8;

  void validate() const {
    if (!(exact_tol > 0.0 && exact_tol <= decision_tol && decision_tol < 1.0))
      throw Error("ToleranceConfig: need 0 < exact_tol <= decision_tol < 1");
    if (!(trend_ratio > 0.0 && trend_ratio < 1.0)) throw Error("ToleranceConfig: need 0 < trend_ratio < 1");
  }
  friend bool operator==(const ToleranceConfig&, const ToleranceConfig&) = default;
};

/// Strictly increasing list of truncations, at least three of them.
class TruncationSchedule {
 public:
  TruncationSchedule() : TruncationSchedule(from_sides({8, 16, 32, 64, 128})) {}
  explicit TruncationSchedule(std::vector<Truncation> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 3) throw Error("TruncationSchedule: at least 3 stages are required");
    for (std::size_t i = 1; i < sizes_.size(); ++i)
      if (!(sizes_[i].M > sizes_[i - 1].M && sizes_[i].N > sizes_[i - 1].N))
        throw Error("TruncationSchedule: stages must increase strictly in both coordinates");
  }

  /// Square stages with the given number of cells per side.
  static TruncationSchedule from_sides(const std::vector<std::size_t>& sides) {
    std::vector<Truncation> t;
    t.reserve(sides.size());
    for (auto s : sides) t.push_back(Truncation::square(s));
    return TruncationSchedule(std::move(t));
  }
  static TruncationSchedule standard() { return from_sides({8, 16, 32, 64, 128}); }
  static TruncationSchedule extended() { return from_sides({256, 512, 1024, 2048}); }

  [[nodiscard]] const std::vector<Truncation>& sizes() const noexcept { return sizes_; }
  [[nodiscard]] std::size_t size() const noexcept { return sizes_.size(); }
  [[nodiscard]] const Truncation& operator[](std::size_t i) const { return sizes_[i]; }
  [[nodiscard]] const Truncation& largest() const { return sizes_.back(); }
  [[nodiscard]] const Truncation& smallest() const { return sizes_.front(); }

  /// Stages with side at most max_side (both coordinates). Throws if fewer
  /// than three remain.
  [[nodiscard]] TruncationSchedule capped(std::size_t max_side) const {
    std::vector<Truncation> t;
    for (const auto& s : sizes_)
      if (s.M + 1 <= max_side && s.N + 1 <= max_side) t.push_back(s);
    return TruncationSchedule(std::move(t));
  }

  friend bool operator==(const TruncationSchedule&, const TruncationSchedule&) = default;

 private:
  std::vector<Truncation> sizes_;
};

enum class Decision { converges, diverges, inconclusive };

inline const char* to_string(Decision d) {
  switch (d) {
    case Decision::converges: return "converges";
    case Decision::diverges: return "diverges";
    case Decision::inconclusive: return "inconclusive";
  }
  return "?";
}

struct TracePoint {
  Truncation stage;
  Scalar residual = 0.0;
};

struct Verdict {
  Decision decision = Decision::inconclusive;
  std::optional<Scalar> candidate_limit;
  std::vector<TracePoint> residual_trace;
  std::string mode;
  std::optional<Scalar> bound;

  [[nodiscard]] bool converges() const noexcept { return decision == Decision::converges; }
  [[nodiscard]] bool diverges() const noexcept { return decision == Decision::diverges; }
  [[nodiscard]] bool inconclusive() const noexcept { return decision == Decision::inconclusive; }
  [[nodiscard]] Scalar final_residual() const {
    return residual_trace.empty() ? 0.0 : residual_trace.back().residual;
  }
};

/// Residual r settled: r <= decision_tol and either r <= exact_tol or r
/// shrank by trend_ratio against the previous stage.
inline bool trace_settles(const std::vector<Scalar>& r, const ToleranceConfig& tol) {
  if (r.empty()) return false;
  const Scalar last = r.back();
  if (!(last <= tol.decision_tol)) return false;
  if (last <= tol.exact_tol) return true;
  return r.size() >= 2 && last <= tol.trend_ratio * r[r.size() - 2];
}

/// Every residual >= decision_tol and the sequence never decreases (up to
/// rounding at the exact_tol scale).
inline bool trace_stays_away(const std::vector<Scalar>& r, const ToleranceConfig& tol) {
  if (r.empty()) return false;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] >= tol.decision_tol)) return false;
    if (i > 0 && r[i] < r[i - 1] - tol.exact_tol * std::max<Scalar>(1.0, r[i - 1])) return false;
  }
  return true;
}

inline Decision decide(const std::vector<Scalar>& residuals, const ToleranceConfig& tol) {
  if (trace_settles(residuals, tol)) return Decision::converges;
  if (trace_stays_away(residuals, tol)) return Decision::diverges;
  return Decision::inconclusive;
}

inline Verdict make_verdict(const TruncationSchedule& sched, const std::vector<Scalar>& residuals,
                            const ToleranceConfig& tol, std::string mode, std::optional<Scalar> candidate) {
  Verdict v;
  v.mode = std::move(mode);
  v.decision = decide(residuals, tol);
  for (std::size_t i = 0; i < residuals.size(); ++i) v.residual_trace.push_back({sched[i], residuals[i]});
  v.candidate_limit = candidate;
  return v;
}

/// Conjunction of notions: converges iff all converge, diverges if any
/// diverges.
inline Decision conjunction(std::initializer_list<Decision> ds) {
  bool all = true;
  for (auto d : ds) {
    if (d == Decision::diverges) return Decision::diverges;
    if (d != Decision::converges) all = false;
  }
  return all ? Decision::converges : Decision::inconclusive;
}

}  // namespace dsum
