#include "eegbench/classical/classifier.hpp"

#include <set>
#include <string>

#include "eegbench/classical/forest.hpp"
#include "eegbench/classical/gbdt.hpp"
#include "eegbench/classical/knn.hpp"
#include "eegbench/classical/linear.hpp"
#include "eegbench/classical/naive_bayes.hpp"
#include "eegbench/errors.hpp"

namespace eegbench {

namespace {

using nlohmann::json;

void require_known_keys(std::string_view kind, const Params& params, std::set<std::string> known) {
  if (!params.is_object()) throw ConfigError(std::string(kind) + " parameters must be a JSON object");
  for (const auto& [key, value] : params.items())
    if (!known.contains(key)) throw ConfigError("unknown parameter '" + key + "' for model " + std::string(kind));
}

template <class T>
T get_or(const Params& params, const char* key, T fallback) {
  if (!params.contains(key)) return fallback;
  try {
    return params.at(key).get<T>();
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("parameter '") + key + "': " + ex.what());
  }
}

std::optional<int> optional_depth(const Params& params, const char* key, std::optional<int> fallback) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (v.is_null() || (v.is_string() && v.get<std::string>() == "unlimited")) return std::nullopt;
  return get_or<int>(params, key, 0);
}

json labeled_to_json(const LabeledData& d) {
  return {{"rows", d.rows}, {"cols", d.cols}, {"num_classes", d.num_classes}, {"features", d.features}, {"labels", d.labels}};
}

LabeledData labeled_from_json(const json& j) {
  LabeledData d;
  d.rows = j.at("rows").get<std::size_t>();
  d.cols = j.at("cols").get<std::size_t>();
  d.num_classes = j.at("num_classes").get<int>();
  d.features = j.at("features").get<std::vector<double>>();
  d.labels = j.at("labels").get<std::vector<int>>();
  return d;
}

class KnnClassifier final : public Classifier {
 public:
  explicit KnnClassifier(const Params& p) {
    require_known_keys("knn", p, {"k"});
    k_ = get_or<int>(p, "k", 5);
  }
  std::string_view kind() const noexcept override { return "knn"; }
  void fit(const LabeledData& train, const ClassWeights&, std::uint64_t) override { model_ = knn_fit(train, k_); }
  ProbPrediction predict_proba(std::span<const double> x) const override { return knn_predict(model_, x); }
  int predict_label(std::span<const double> x) const override { return knn_classify(model_, x); }
  json to_json() const override {
    return {{"kind", kind()}, {"params", {{"k", k_}}}, {"model", {{"train", labeled_to_json(model_.train)}}}};
  }
  void restore(const json& m) { model_ = knn_fit(labeled_from_json(m.at("train")), k_); }

 private:
  int k_;
  KnnModel model_;
};

class LinearClassifier final : public Classifier {
 public:
  LinearClassifier(LossKind loss, const Params& p) {
    kind_ = loss == LossKind::Logistic ? "logreg" : "linsvm";
    require_known_keys(kind_, p, {"l2_lambda", "step_size", "max_epochs", "tolerance"});
    config_.loss = loss;
    config_.l2_lambda = get_or<double>(p, "l2_lambda", config_.l2_lambda);
    config_.step_size = get_or<double>(p, "step_size", config_.step_size);
    config_.max_epochs = get_or<int>(p, "max_epochs", config_.max_epochs);
    config_.tolerance = get_or<double>(p, "tolerance", config_.tolerance);
  }
  std::string_view kind() const noexcept override { return kind_; }
  void fit(const LabeledData& train, const ClassWeights& weights, std::uint64_t) override {
    model_ = linear_fit(train, config_, weights);
  }
  ProbPrediction predict_proba(std::span<const double> x) const override { return linear_predict(model_, x); }
  json to_json() const override {
    return {{"kind", kind_},
            {"params",
             {{"l2_lambda", config_.l2_lambda},
              {"step_size", config_.step_size},
              {"max_epochs", config_.max_epochs},
              {"tolerance", config_.tolerance}}},
            {"model",
             {{"loss", loss_name(config_.loss)},
              {"num_classes", model_.num_classes},
              {"weights", model_.weights},
              {"biases", model_.biases},
              {"epochs_run", epochs_run()}}}};
  }
  void restore(const json& m) {
    model_.config = config_;
    model_.num_classes = m.at("num_classes").get<int>();
    model_.weights = m.at("weights").get<std::vector<std::vector<double>>>();
    model_.biases = m.at("biases").get<std::vector<double>>();
  }

 private:
  std::vector<std::size_t> epochs_run() const {
    std::vector<std::size_t> out;
    for (const auto& h : model_.loss_history) out.push_back(h.empty() ? 0 : h.size() - 1);
    return out;
  }

  std::string kind_;
  LinearConfig config_;
  LinearModel model_;
};

class NbClassifier final : public Classifier {
 public:
  explicit NbClassifier(const Params& p) { require_known_keys("nb", p, {}); }
  std::string_view kind() const noexcept override { return "nb"; }
  void fit(const LabeledData& train, const ClassWeights&, std::uint64_t) override { model_ = nb_fit(train); }
  ProbPrediction predict_proba(std::span<const double> x) const override { return nb_predict(model_, x); }
  json to_json() const override {
    return {{"kind", kind()},
            {"params", json::object()},
            {"model",
             {{"priors", model_.priors},
              {"means", model_.means},
              {"variances", model_.variances},
              {"variance_floor", model_.variance_floor}}}};
  }
  void restore(const json& m) {
    model_.priors = m.at("priors").get<std::vector<double>>();
    model_.means = m.at("means").get<std::vector<std::vector<double>>>();
    model_.variances = m.at("variances").get<std::vector<std::vector<double>>>();
    model_.variance_floor = m.at("variance_floor").get<double>();
  }

 private:
  GaussianNbModel model_;
};

json depth_json(const std::optional<int>& d) { return d ? json(*d) : json(nullptr); }

class RfClassifier final : public Classifier {
 public:
  explicit RfClassifier(const Params& p) {
    require_known_keys("rf", p, {"n_estimators", "max_depth", "feature_subset_size", "bootstrap"});
    config_.n_estimators = get_or<int>(p, "n_estimators", config_.n_estimators);
    config_.max_depth = optional_depth(p, "max_depth", config_.max_depth);
    config_.feature_subset_size = get_or<std::size_t>(p, "feature_subset_size", config_.feature_subset_size);
    config_.bootstrap = get_or<bool>(p, "bootstrap", config_.bootstrap);
  }
  std::string_view kind() const noexcept override { return "rf"; }
  void fit(const LabeledData& train, const ClassWeights&, std::uint64_t seed) override {
    model_ = rf_fit(train, config_, seed);
  }
  ProbPrediction predict_proba(std::span<const double> x) const override { return rf_predict(model_, x); }
  json to_json() const override {
    json trees = json::array();
    for (const auto& t : model_.trees) trees.push_back(t.to_json());
    return {{"kind", kind()},
            {"params",
             {{"n_estimators", config_.n_estimators},
              {"max_depth", depth_json(config_.max_depth)},
              {"feature_subset_size", model_.config.feature_subset_size},
              {"bootstrap", config_.bootstrap}}},
            {"model", {{"num_classes", model_.num_classes}, {"seed", model_.seed}, {"trees", trees}}}};
  }
  void restore(const json& m) {
    model_.config = config_;
    model_.num_classes = m.at("num_classes").get<int>();
    model_.seed = m.at("seed").get<std::uint64_t>();
    for (const auto& t : m.at("trees")) model_.trees.push_back(DecisionTree::from_json(t));
  }

 private:
  ForestConfig config_;
  RandomForestModel model_;
};

class GbdtClassifier final : public Classifier {
 public:
  explicit GbdtClassifier(const Params& p) {
    require_known_keys("gbdt", p, {"learning_rate", "n_rounds", "max_depth"});
    config_.learning_rate = get_or<double>(p, "learning_rate", config_.learning_rate);
    config_.n_rounds = get_or<int>(p, "n_rounds", config_.n_rounds);
    config_.max_depth = get_or<int>(p, "max_depth", config_.max_depth);
  }
  std::string_view kind() const noexcept override { return "gbdt"; }
  void fit(const LabeledData& train, const ClassWeights& weights, std::uint64_t seed) override {
    model_ = gbdt_fit(train, config_, weights, seed);
  }
  ProbPrediction predict_proba(std::span<const double> x) const override { return gbdt_predict(model_, x); }
  json to_json() const override {
    json rounds = json::array();
    for (const auto& round : model_.rounds) {
      json r = json::array();
      for (const auto& t : round) r.push_back(t.to_json());
      rounds.push_back(std::move(r));
    }
    return {{"kind", kind()},
            {"params",
             {{"learning_rate", config_.learning_rate},
              {"n_rounds", config_.n_rounds},
              {"max_depth", config_.max_depth}}},
            {"model",
             {{"num_classes", model_.num_classes},
              {"initial", model_.initial},
              {"train_loss", model_.train_loss},
              {"rounds", rounds}}}};
  }
  void restore(const json& m) {
    model_.config = config_;
    model_.num_classes = m.at("num_classes").get<int>();
    model_.initial = m.at("initial").get<std::vector<double>>();
    model_.train_loss = m.at("train_loss").get<std::vector<double>>();
    for (const auto& r : m.at("rounds")) {
      std::vector<DecisionTree> round;
      for (const auto& t : r) round.push_back(DecisionTree::from_json(t));
      model_.rounds.push_back(std::move(round));
    }
  }

 private:
  GbdtConfig config_;
  GbdtModel model_;
};

}  // namespace

std::unique_ptr<Classifier> make_classifier(std::string_view kind, const Params& params) {
  const Params p = params.is_null() ? Params::object() : params;
  if (kind == "knn") return std::make_unique<KnnClassifier>(p);
  if (kind == "logreg") return std::make_unique<LinearClassifier>(LossKind::Logistic, p);
  if (kind == "linsvm") return std::make_unique<LinearClassifier>(LossKind::Hinge, p);
  if (kind == "nb") return std::make_unique<NbClassifier>(p);
  if (kind == "rf") return std::make_unique<RfClassifier>(p);
  if (kind == "gbdt") return std::make_unique<GbdtClassifier>(p);
  throw ConfigError("unknown classical model kind '" + std::string(kind) + "'");
}

std::unique_ptr<Classifier> load_classifier(const nlohmann::json& artifact) {
  try {
    const auto kind = artifact.at("kind").get<std::string>();
    Params params = artifact.at("params");
    const auto& m = artifact.at("model");
    if (kind == "knn") {
      auto c = std::make_unique<KnnClassifier>(params);
      c->restore(m);
      return c;
    }
    if (kind == "logreg" || kind == "linsvm") {
      auto c = std::make_unique<LinearClassifier>(kind == "logreg" ? LossKind::Logistic : LossKind::Hinge, params);
      c->restore(m);
      return c;
    }
    if (kind == "nb") {
      auto c = std::make_unique<NbClassifier>(params);
      c->restore(m);
      return c;
    }
    if (kind == "rf") {
      auto c = std::make_unique<RfClassifier>(params);
      c->restore(m);
      return c;
    }
    if (kind == "gbdt") {
      auto c = std::make_unique<GbdtClassifier>(params);
      c->restore(m);
      return c;
    }
    throw ConfigError("unknown model kind '" + kind + "' in artifact");
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("malformed model artifact: ") + ex.what());
  }
}

}  // namespace eegbench
