#include "fnd/models/forest.hpp"

#include "fnd/error.hpp"
#include "fnd/parallel.hpp"

namespace fnd {

void ForestConfig::validate() const {
  if (n_trees < 1) throw Error(ErrorKind::InvalidArgument, "n_trees must be at least 1");
  if (max_features < 1) throw Error(ErrorKind::InvalidArgument, "max_features must be at least 1");
  if (min_samples_leaf < 1) throw Error(ErrorKind::InvalidArgument, "min_samples_leaf must be at least 1");
}

RandomForest RandomForest::fit(const SparseRowMatrix& x, std::span<const Label> y, const ForestConfig& config) {
  config.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(ErrorKind::LengthMismatch, "rows and labels differ in count");
  require_two_classes(y);

  const TreeData data(x);
  const Eigen::VectorXd targets = to_targets(y);
  const std::span<const double> t(targets.data(), static_cast<std::size_t>(targets.size()));
  const TreeGrowth growth{.max_features = config.max_features,
                          .max_depth = config.max_depth,
                          .min_samples_leaf = static_cast<double>(config.min_samples_leaf),
                          .criterion = SplitCriterion::Gini};
  const auto n = y.size();
  std::vector<DecisionTree> trees(config.n_trees);
  parallel_for(config.n_trees, config.jobs, [&](std::size_t k) {
    Rng rng(derive_seed(config.seed, k));
    std::vector<double> weights(n, config.bootstrap ? 0.0 : 1.0);
    if (config.bootstrap) {
      for (std::size_t draw = 0; draw < n; ++draw) weights[rng.below(n)] += 1.0;
    }
    trees[k] = DecisionTree::grow(data, t, weights, growth, rng);
  });
  return RandomForest(std::move(trees), static_cast<std::size_t>(x.cols()));
}

std::size_t RandomForest::fake_votes(const SparseRowMatrix& x, Eigen::Index row) const {
  std::size_t votes = 0;
  for (const auto& tree : trees_) votes += label_from_score(tree.predict(x, row)) == Label::Fake;
  return votes;
}

Eigen::VectorXd RandomForest::scores(const SparseRowMatrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim_) {
    throw Error(ErrorKind::ShapeMismatch, "input width differs from the training width");
  }
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out[r] = static_cast<double>(fake_votes(x, r)) / static_cast<double>(trees_.size());
  }
  return out;
}

}  // namespace fnd
