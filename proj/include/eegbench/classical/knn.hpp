#pragma once

#include <span>

#include "eegbench/preprocess.hpp"
#include "eegbench/prob.hpp"

namespace eegbench {

/// K nearest neighbours under Euclidean distance. Stores the training set.
struct KnnModel {
  int k = 5;
  LabeledData train;
};

/// Throws EmptyInputError for an empty set, PreconditionError unless
/// 1 <= k <= train.rows.
KnnModel knn_fit(LabeledData train, int k);

/// Neighbour vote fractions. Equal distances are ordered by training index.
ProbPrediction knn_predict(const KnnModel& model, std::span<const double> x);

/// Majority label; a tied vote goes to the class whose tied neighbours have the
/// smaller summed distance, then to the lower class index.
int knn_classify(const KnnModel& model, std::span<const double> x);

}  // namespace eegbench
