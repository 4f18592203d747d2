#include "eegbench/classical/tree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "eegbench/errors.hpp"

namespace eegbench {

SortedColumns::SortedColumns(const LabeledData& data)
    : rows_(data.rows), cols_(data.cols), values_(data.rows * data.cols), order_(data.rows * data.cols) {
  if (rows_ > UINT32_MAX) throw PreconditionError("too many rows for tree construction");
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t f = 0; f < cols_; ++f) values_[f * rows_ + i] = data.features[i * cols_ + f];
  for (std::size_t f = 0; f < cols_; ++f) {
    auto* first = order_.data() + f * rows_;
    std::iota(first, first + rows_, std::uint32_t{0});
    const double* col = values_.data() + f * rows_;
    std::sort(first, first + rows_, [col](std::uint32_t a, std::uint32_t b) {
      return col[a] < col[b] || (col[a] == col[b] && a < b);
    });
  }
}

std::size_t DecisionTree::leaf_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

int DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  int deepest = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.feature >= 0) {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return deepest;
}

const DecisionTree::Node& DecisionTree::leaf_node(std::span<const double> x) const {
  const Node* n = &nodes_.front();
  while (n->feature >= 0) {
    const auto f = static_cast<std::size_t>(n->feature);
    if (f >= x.size()) throw ShapeError("query has fewer features than the tree uses");
    n = &nodes_[static_cast<std::size_t>(x[f] <= n->threshold ? n->left : n->right)];
  }
  return *n;
}

std::span<const double> DecisionTree::leaf_counts(std::span<const double> x) const {
  const auto k = static_cast<std::size_t>(num_classes_);
  return {leaf_values_.data() + static_cast<std::size_t>(leaf_node(x).leaf) * k, k};
}

ProbPrediction DecisionTree::class_frequencies(std::span<const double> x) const {
  const auto counts = leaf_counts(x);
  ProbPrediction p{std::vector<double>(counts.begin(), counts.end())};
  normalize(p.scores);
  return p;
}

double DecisionTree::predict_value(std::span<const double> x) const {
  return leaf_values_[static_cast<std::size_t>(leaf_node(x).leaf)];
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf});
  return {{"num_classes", num_classes_}, {"nodes", nodes}, {"leaf_values", leaf_values_}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  DecisionTree t;
  t.num_classes_ = j.at("num_classes").get<int>();
  for (const auto& n : j.at("nodes")) {
    t.nodes_.push_back(Node{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                            n.at(4).get<int>()});
  }
  t.leaf_values_ = j.at("leaf_values").get<std::vector<double>>();
  if (t.nodes_.empty()) throw ConfigError("tree artifact has no nodes");
  return t;
}

class TreeBuilderAccess {
 public:
  static std::vector<DecisionTree::Node>& nodes(DecisionTree& t) { return t.nodes_; }
  static std::vector<double>& leaves(DecisionTree& t) { return t.leaf_values_; }
  static void set_classes(DecisionTree& t, int k) { t.num_classes_ = k; }
};

namespace {

// Per-node sufficient statistics. Gini: weighted class counts. Squared
// error: {sum w, sum w*t, sum w*t^2}. The split score maximized is
// proxy(left) + proxy(right), which equals a constant minus the children's
// weighted impurity.
struct GiniCriterion {
  std::span<const int> labels;
  std::size_t classes;

  std::size_t width() const { return classes; }
  void add(double* s, std::uint32_t row, double w) const { s[labels[row]] += w; }
  double weight(const double* s) const {
    double t = 0.0;
    for (std::size_t c = 0; c < classes; ++c) t += s[c];
    return t;
  }
  double proxy(const double* s) const {
    double sq = 0.0;
    double t = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      sq += s[c] * s[c];
      t += s[c];
    }
    return t > 0.0 ? sq / t : 0.0;
  }
  double scale(const double* s) const { return weight(s); }
  bool pure(const double* s) const {
    std::size_t nonzero = 0;
    for (std::size_t c = 0; c < classes; ++c) nonzero += s[c] > 0.0 ? 1 : 0;
    return nonzero <= 1;
  }
  void leaf(const double* s, std::vector<double>& out) const { out.insert(out.end(), s, s + classes); }
};

struct SquaredErrorCriterion {
  std::span<const double> targets;

  std::size_t width() const { return 3; }
  void add(double* s, std::uint32_t row, double w) const {
    const double t = targets[row];
    s[0] += w;
    s[1] += w * t;
    s[2] += w * t * t;
  }
  double weight(const double* s) const { return s[0]; }
  double proxy(const double* s) const { return s[0] > 0.0 ? s[1] * s[1] / s[0] : 0.0; }
  double scale(const double* s) const { return s[2]; }
  bool pure(const double*) const { return false; }
  void leaf(const double* s, std::vector<double>& out) const { out.push_back(s[0] > 0.0 ? s[1] / s[0] : 0.0); }
};

constexpr double kMinRelativeGain = 1e-12;

template <class Criterion>
class Builder {
 public:
  Builder(const SortedColumns& columns, Criterion crit, std::span<const double> weights, const TreeConfig& config,
          Rng& rng)
      : cols_(columns), crit_(crit), weights_(weights), config_(config), rng_(rng) {}

  DecisionTree build(int num_classes) {
    if (weights_.size() != cols_.rows()) throw ShapeError("sample weight count does not match rows");
    const std::size_t d = cols_.cols();
    for (std::size_t r = 0; r < cols_.rows(); ++r) n_ += weights_[r] > 0.0 ? 1 : 0;
    if (n_ == 0) throw EmptyInputError("tree needs at least one weighted row");

    order_.resize(d * n_);
    for (std::size_t f = 0; f < d; ++f) {
      std::size_t pos = 0;
      for (std::uint32_t r : cols_.order(f))
        if (weights_[r] > 0.0) order_[f * n_ + pos++] = r;
    }
    buffer_.resize(n_);
    goes_left_.assign(cols_.rows(), 0);
    features_.resize(d);

    DecisionTree tree;
    TreeBuilderAccess::set_classes(tree, num_classes);
    auto& nodes = TreeBuilderAccess::nodes(tree);
    auto& leaves = TreeBuilderAccess::leaves(tree);
    nodes.emplace_back();

    struct Task {
      int node;
      std::size_t begin;
      std::size_t end;
      int depth;
    };
    std::vector<Task> stack{{0, 0, n_, 0}};
    std::vector<double> parent(crit_.width());
    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();

      std::fill(parent.begin(), parent.end(), 0.0);
      for (std::size_t p = task.begin; p < task.end; ++p) crit_.add(parent.data(), order_[p], weights_[order_[p]]);

      const bool depth_capped = config_.max_depth && task.depth >= *config_.max_depth;
      Split split;
      if (!depth_capped && !crit_.pure(parent.data()) && task.end - task.begin > 1)
        split = best_split(task.begin, task.end, parent);
      if (split.feature < 0) {
        nodes[static_cast<std::size_t>(task.node)].leaf = static_cast<int>(leaves.size() / leaf_width(num_classes));
        crit_.leaf(parent.data(), leaves);
        continue;
      }

      const std::size_t mid = partition(task.begin, task.end, split);
      const int left = static_cast<int>(nodes.size());
      nodes.emplace_back();
      nodes.emplace_back();
      auto& node = nodes[static_cast<std::size_t>(task.node)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, mid, task.end, task.depth + 1});
      stack.push_back({left, task.begin, mid, task.depth + 1});
    }
    return tree;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    std::size_t last_left = 0;  // position within the feature's segment
  };

  static std::size_t leaf_width(int num_classes) { return num_classes > 0 ? static_cast<std::size_t>(num_classes) : 1; }

  std::span<const std::size_t> candidate_features() {
    const std::size_t d = cols_.cols();
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    const std::size_t m = config_.feature_subset_size;
    if (m == 0 || m >= d) return features_;
    for (std::size_t i = 0; i < m; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(d - i));
      std::swap(features_[i], features_[j]);
    }
    return std::span<const std::size_t>(features_).first(m);
  }

  Split best_split(std::size_t begin, std::size_t end, const std::vector<double>& parent) {
    const double parent_proxy = crit_.proxy(parent.data());
    double best_gain = kMinRelativeGain * std::max(crit_.scale(parent.data()), 1e-300);
    Split best;
    std::vector<double> left(parent.size());
    std::vector<double> right(parent.size());
    for (std::size_t f : candidate_features()) {
      const std::uint32_t* seg = order_.data() + f * n_;
      std::fill(left.begin(), left.end(), 0.0);
      for (std::size_t p = begin; p + 1 < end; ++p) {
        const std::uint32_t r = seg[p];
        crit_.add(left.data(), r, weights_[r]);
        const double v = cols_.value(r, f);
        const double next = cols_.value(seg[p + 1], f);
        if (!(next > v)) continue;
        for (std::size_t s = 0; s < parent.size(); ++s) right[s] = parent[s] - left[s];
        const double gain = crit_.proxy(left.data()) + crit_.proxy(right.data()) - parent_proxy;
        if (gain > best_gain) {
          best_gain = gain;
          best.feature = static_cast<int>(f);
          best.threshold = v + (next - v) / 2.0;
          best.last_left = p;
        }
      }
    }
    return best;
  }

  // Stable partition of every feature's segment; returns the first right position.
  std::size_t partition(std::size_t begin, std::size_t end, const Split& split) {
    const auto bf = static_cast<std::size_t>(split.feature);
    const std::uint32_t* seg = order_.data() + bf * n_;
    for (std::size_t p = begin; p < end; ++p) goes_left_[seg[p]] = p <= split.last_left ? 1 : 0;
    const std::size_t mid = split.last_left + 1;
    for (std::size_t f = 0; f < cols_.cols(); ++f) {
      std::uint32_t* s = order_.data() + f * n_;
      std::size_t l = begin;
      std::size_t r = 0;
      for (std::size_t p = begin; p < end; ++p) {
        if (goes_left_[s[p]]) {
          s[l++] = s[p];
        } else {
          buffer_[r++] = s[p];
        }
      }
      std::copy(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(r), s + l);
    }
    return mid;
  }

  const SortedColumns& cols_;
  Criterion crit_;
  std::span<const double> weights_;
  const TreeConfig& config_;
  Rng& rng_;
  std::size_t n_ = 0;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> buffer_;
  std::vector<char> goes_left_;
  std::vector<std::size_t> features_;
};

}  // namespace

DecisionTree fit_classification_tree(const SortedColumns& columns, std::span<const int> labels, int num_classes,
                                     std::span<const double> sample_weights, const TreeConfig& config, Rng& rng) {
  if (labels.size() != columns.rows()) throw ShapeError("label count does not match rows");
  Builder<GiniCriterion> b(columns, GiniCriterion{labels, static_cast<std::size_t>(num_classes)}, sample_weights,
                           config, rng);
  return b.build(num_classes);
}

DecisionTree fit_regression_tree(const SortedColumns& columns, std::span<const double> targets,
                                 std::span<const double> sample_weights, const TreeConfig& config, Rng& rng) {
  if (targets.size() != columns.rows()) throw ShapeError("target count does not match rows");
  Builder<SquaredErrorCriterion> b(columns, SquaredErrorCriterion{targets}, sample_weights, config, rng);
  return b.build(0);
}

DecisionTree tree_fit(const LabeledData& train, const TreeConfig& config, Rng& rng) {
  if (train.rows == 0) throw EmptyInputError("tree needs a non-empty training set");
  const SortedColumns columns(train);
  const std::vector<double> ones(train.rows, 1.0);
  return fit_classification_tree(columns, train.labels, train.num_classes, ones, config, rng);
}

}  // namespace eegbench
