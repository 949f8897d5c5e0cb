#pragma once

#include <span>
#include <vector>

#include "fnd/models/common.hpp"
#include "fnd/models/tree.hpp"

namespace fnd {

struct GbtConfig {
  std::size_t n_trees = 100;
  std::size_t max_features = 50;
  double learning_rate = 0.1;
  std::size_t tree_depth = 3;
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Stagewise additive logistic model. Stage m fits a depth-limited
/// regression tree to the residuals y - p of the current model; its leaves
/// hold mean residuals and are added with the learning rate as shrinkage.
class GradientBoostedTrees {
 public:
  GradientBoostedTrees() = default;
  GradientBoostedTrees(double initial_score, double learning_rate, std::vector<DecisionTree> stages, std::size_t input_dim)
      : initial_score_(initial_score), learning_rate_(learning_rate), stages_(std::move(stages)), input_dim_(input_dim) {}

  /// Per-stage training loss goes to `history` when given (loss[m] after stage m).
  static GradientBoostedTrees fit(const SparseRowMatrix& x, std::span<const Label> y, const GbtConfig& config,
                                  TrainingHistory* history = nullptr);

  Eigen::VectorXd decision_function(const SparseRowMatrix& x) const;
  /// P(FAKE) per row.
  Eigen::VectorXd scores(const SparseRowMatrix& x) const;

  /// The model made of the first `stages` stages only.
  GradientBoostedTrees truncated(std::size_t stages) const;

  double initial_score() const noexcept { return initial_score_; }
  double learning_rate() const noexcept { return learning_rate_; }
  const std::vector<DecisionTree>& stages() const noexcept { return stages_; }
  std::size_t input_dim() const noexcept { return input_dim_; }

 private:
  double initial_score_ = 0.0;
  double learning_rate_ = 0.1;
  std::vector<DecisionTree> stages_;
  std::size_t input_dim_ = 0;
};

/// Mean logistic loss of logits against 0/1 targets.
double logistic_loss(const Eigen::VectorXd& logits, const Eigen::VectorXd& targets);

}  // namespace fnd
