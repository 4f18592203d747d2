#include "eegbench/classical/knn.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "eegbench/errors.hpp"

namespace eegbench {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  // Four partial sums; fixed association order keeps results reproducible.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= a.size(); j += 4) {
    const double d0 = a[j] - b[j];
    const double d1 = a[j + 1] - b[j + 1];
    const double d2 = a[j + 2] - b[j + 2];
    const double d3 = a[j + 3] - b[j + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s0 += d * d;
  }
  return (s0 + s1) + (s2 + s3);
}

// The k nearest (squared distance, training index) pairs, ascending.
std::vector<std::pair<double, std::size_t>> nearest(const KnnModel& model, std::span<const double> x) {
  if (x.size() != model.train.cols) throw ShapeError("query has " + std::to_string(x.size()) + " features, model expects " + std::to_string(model.train.cols));
  std::vector<std::pair<double, std::size_t>> d(model.train.rows);
  for (std::size_t i = 0; i < model.train.rows; ++i) d[i] = {squared_distance(x, model.train.row(i)), i};
  const auto k = static_cast<std::size_t>(model.k);
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  d.resize(k);
  return d;
}

}  // namespace

KnnModel knn_fit(LabeledData train, int k) {
  if (train.rows == 0) throw EmptyInputError("KNN needs a non-empty training set");
  if (k < 1 || static_cast<std::size_t>(k) > train.rows) {
    throw PreconditionError("KNN requires 1 <= K <= training size (K=" + std::to_string(k) +
                            ", n=" + std::to_string(train.rows) + ")");
  }
  return KnnModel{k, std::move(train)};
}

ProbPrediction knn_predict(const KnnModel& model, std::span<const double> x) {
  ProbPrediction p;
  p.scores.assign(static_cast<std::size_t>(model.train.num_classes), 0.0);
  for (const auto& [dist, i] : nearest(model, x)) p.scores[static_cast<std::size_t>(model.train.labels[i])] += 1.0;
  for (double& s : p.scores) s /= static_cast<double>(model.k);
  return p;
}

int knn_classify(const KnnModel& model, std::span<const double> x) {
  const auto classes = static_cast<std::size_t>(model.train.num_classes);
  std::vector<int> votes(classes, 0);
  std::vector<double> distance_sum(classes, 0.0);
  for (const auto& [dist, i] : nearest(model, x)) {
    const auto c = static_cast<std::size_t>(model.train.labels[i]);
    ++votes[c];
    distance_sum[c] += std::sqrt(dist);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes; ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && distance_sum[c] < distance_sum[best])) best = c;
  }
  return static_cast<int>(best);
}

}  // namespace eegbench
