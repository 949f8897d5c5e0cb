#include "fnd/models/gbt.hpp"

#include <cmath>

#include "fnd/error.hpp"
#include "fnd/models/nn.hpp"

namespace fnd {

void GbtConfig::validate() const {
  if (n_trees < 1) throw Error(ErrorKind::InvalidArgument, "n_trees must be at least 1");
  if (max_features < 1) throw Error(ErrorKind::InvalidArgument, "max_features must be at least 1");
  if (!(learning_rate > 0 && learning_rate <= 1)) throw Error(ErrorKind::InvalidArgument, "learning_rate must lie in (0, 1]");
  if (tree_depth < 1) throw Error(ErrorKind::InvalidArgument, "tree_depth must be at least 1");
  if (min_samples_leaf < 1) throw Error(ErrorKind::InvalidArgument, "min_samples_leaf must be at least 1");
}

double logistic_loss(const Eigen::VectorXd& logits, const Eigen::VectorXd& targets) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) total += nn::bce_with_logit(logits[i], targets[i]);
  return logits.size() ? total / static_cast<double>(logits.size()) : 0.0;
}

GradientBoostedTrees GradientBoostedTrees::fit(const SparseRowMatrix& x, std::span<const Label> y,
                                               const GbtConfig& config, TrainingHistory* history) {
  config.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(ErrorKind::LengthMismatch, "rows and labels differ in count");
  require_two_classes(y);

  const auto n = static_cast<Eigen::Index>(y.size());
  const Eigen::VectorXd targets = to_targets(y);
  const double p = targets.mean();
  const double init = std::log(p / (1.0 - p));
  Eigen::VectorXd logits = Eigen::VectorXd::Constant(n, init);
  if (history) history->initial_loss = logistic_loss(logits, targets);

  const TreeData data(x);
  const std::vector<double> weights(y.size(), 1.0);
  const TreeGrowth growth{.max_features = config.max_features,
                          .max_depth = config.tree_depth,
                          .min_samples_leaf = static_cast<double>(config.min_samples_leaf),
                          .criterion = SplitCriterion::SquaredError};
  std::vector<double> residuals(y.size());
  std::vector<DecisionTree> stages;
  stages.reserve(config.n_trees);
  for (std::size_t m = 0; m < config.n_trees; ++m) {
    for (Eigen::Index i = 0; i < n; ++i) residuals[static_cast<std::size_t>(i)] = targets[i] - nn::sigmoid(logits[i]);
    Rng rng(derive_seed(config.seed, m));
    stages.push_back(DecisionTree::grow(data, residuals, weights, growth, rng));
    for (Eigen::Index i = 0; i < n; ++i) logits[i] += config.learning_rate * stages.back().predict(x, i);
    if (history) history->loss.push_back(logistic_loss(logits, targets));
  }
  return GradientBoostedTrees(init, config.learning_rate, std::move(stages), static_cast<std::size_t>(x.cols()));
}

Eigen::VectorXd GradientBoostedTrees::decision_function(const SparseRowMatrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim_) {
    throw Error(ErrorKind::ShapeMismatch, "input width differs from the training width");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), initial_score_);
  for (const auto& tree : stages_) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) out[r] += learning_rate_ * tree.predict(x, r);
  }
  return out;
}

Eigen::VectorXd GradientBoostedTrees::scores(const SparseRowMatrix& x) const {
  return decision_function(x).unaryExpr([](double z) { return nn::sigmoid(z); });
}

GradientBoostedTrees GradientBoostedTrees::truncated(std::size_t stages) const {
  stages = std::min(stages, stages_.size());
  return GradientBoostedTrees(initial_score_, learning_rate_,
                              std::vector<DecisionTree>(stages_.begin(), stages_.begin() + static_cast<std::ptrdiff_t>(stages)),
                              input_dim_);
}

}  // namespace fnd
