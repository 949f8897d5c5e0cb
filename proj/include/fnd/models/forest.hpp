#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fnd/models/common.hpp"
#include "fnd/models/tree.hpp"

namespace fnd {

struct ForestConfig {
  std::size_t n_trees = 100;
  /// Features sampled per split; values above the feature count mean all features.
  std::size_t max_features = 50;
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_leaf = 1;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  /// Worker threads; results do not depend on it.
  std::size_t jobs = 1;

  void validate() const;
};

/// Bagged CART trees with Gini splits. Each tree draws from its own derived
/// seed, so the forest is identical for any worker count.
class RandomForest {
 public:
  RandomForest() = default;
  RandomForest(std::vector<DecisionTree> trees, std::size_t input_dim)
      : trees_(std::move(trees)), input_dim_(input_dim) {}

  static RandomForest fit(const SparseRowMatrix& x, std::span<const Label> y, const ForestConfig& config);

  /// Number of trees voting FAKE for one row; a tree votes FAKE when at least
  /// half of its leaf weight is FAKE.
  std::size_t fake_votes(const SparseRowMatrix& x, Eigen::Index row) const;

  /// Vote fraction for FAKE per row.
  Eigen::VectorXd scores(const SparseRowMatrix& x) const;

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  std::size_t input_dim() const noexcept { return input_dim_; }

 private:
  std::vector<DecisionTree> trees_;
  std::size_t input_dim_ = 0;
};

}  // namespace fnd
