#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace eegbench {

/// Per-class probability scores for one record.
struct ProbPrediction {
  std::vector<double> scores;

  std::size_t size() const noexcept { return scores.size(); }
  double operator[](std::size_t c) const { return scores[c]; }
  bool operator==(const ProbPrediction&) const = default;
};

/// Index of the largest score; ties go to the lowest index.
inline int argmax_label(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return static_cast<int>(best);
}

inline int argmax_label(const ProbPrediction& p) { return argmax_label(std::span<const double>(p.scores)); }

/// Entries in [0,1] and summing to 1 within `tol`.
inline bool is_valid(const ProbPrediction& p, double tol = 1e-9) {
  if (p.scores.empty()) return false;
  double sum = 0.0;
  for (double s : p.scores) {
    if (!(s >= 0.0 && s <= 1.0)) return false;
    sum += s;
  }
  return sum >= 1.0 - tol && sum <= 1.0 + tol;
}

/// Divides by the sum in place. Requires a positive sum.
inline void normalize(std::vector<double>& scores) {
  double sum = 0.0;
  for (double s : scores) sum += s;
  for (double& s : scores) s /= sum;
}

}  // namespace eegbench
