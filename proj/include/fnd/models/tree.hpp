#pragma once

#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fnd/rng.hpp"
#include "fnd/vectorize.hpp"

namespace fnd {

using SparseColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, std::int32_t>;

enum class SplitCriterion { Gini, SquaredError };

/// Gini impurity of a two-class node given class weights.
double gini_impurity(double weight_true, double weight_fake);

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  /// Leaf output: FAKE weight fraction (Gini) or weighted mean target.
  double value = 0.0;
};

struct TreeGrowth {
  std::size_t max_features = 0;  // 0 or >= feature count: all features
  std::optional<std::size_t> max_depth;
  double min_samples_leaf = 1.0;
  SplitCriterion criterion = SplitCriterion::Gini;
};

/// Training matrix with both row and column access.
class TreeData {
 public:
  explicit TreeData(const SparseRowMatrix& x);
  const SparseRowMatrix& rows() const noexcept { return *rows_; }
  const SparseColMatrix& cols() const noexcept { return cols_; }

 private:
  const SparseRowMatrix* rows_;
  SparseColMatrix cols_;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  /// CART growth on weighted samples; samples of weight 0 are left out.
  /// `targets` are 0/1 class indicators for Gini, real values otherwise.
  static DecisionTree grow(const TreeData& data, std::span<const double> targets, std::span<const double> weights,
                           const TreeGrowth& growth, Rng& rng);

  double predict(const SparseRowMatrix& x, Eigen::Index row) const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;
  std::size_t leaves() const;

 private:
  std::vector<TreeNode> nodes_;
};

}  // namespace fnd
