#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "eegbench/preprocess.hpp"
#include "eegbench/prob.hpp"

namespace eegbench {

/// Hyperparameters of a classifier as a flat JSON object.
using Params = nlohmann::json;

/// Fit on labeled rows, emit per-class probability scores.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string_view kind() const noexcept = 0;
  virtual void fit(const LabeledData& train, const ClassWeights& weights, std::uint64_t seed) = 0;
  virtual ProbPrediction predict_proba(std::span<const double> x) const = 0;
  /// Hard label. Defaults to argmax with ties to the lowest class.
  virtual int predict_label(std::span<const double> x) const { return argmax_label(predict_proba(x)); }
  /// Self-describing artifact: kind, hyperparameters and fitted parameters.
  virtual nlohmann::json to_json() const = 0;
};

/// Kinds: "knn", "logreg", "linsvm", "nb", "rf", "gbdt". Unknown kinds or
/// malformed params throw ConfigError.
std::unique_ptr<Classifier> make_classifier(std::string_view kind, const Params& params);

/// Rebuilds a fitted classifier from `Classifier::to_json` output.
std::unique_ptr<Classifier> load_classifier(const nlohmann::json& artifact);

}  // namespace eegbench
