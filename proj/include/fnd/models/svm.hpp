#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "fnd/models/common.hpp"
#include "fnd/vectorize.hpp"

namespace fnd {

enum class Kernel { Linear, Rbf };

std::string_view to_string(Kernel kernel) noexcept;
Kernel parse_kernel(std::string_view text);

struct SvmConfig {
  Kernel kernel = Kernel::Linear;
  double C = 1.0;
  double gamma = 1.0;
  std::size_t rff_features = 2048;
  std::size_t epochs = 20;
  /// Multiplier on the 1 / (lambda t) step schedule.
  double learning_rate = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Random Fourier features for exp(-gamma ||x - y||^2):
/// phi(x) = sqrt(2 / D) [cos(W^T x), sin(W^T x)], columns of W ~ N(0, 2 gamma I).
///
/// Row r of W is drawn from its own derived seed, so the map is fully
/// determined by (input_dim, features, gamma, seed).
class RandomFourierMap {
 public:
  RandomFourierMap() = default;
  RandomFourierMap(std::size_t input_dim, std::size_t features, double gamma, std::uint64_t seed);

  Eigen::MatrixXd transform(const SparseRowMatrix& x) const;
  Eigen::VectorXd transform(const Eigen::VectorXd& x) const;

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t features() const noexcept { return features_; }
  double gamma() const noexcept { return gamma_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::size_t input_dim_ = 0;
  std::size_t features_ = 0;
  double gamma_ = 1.0;
  std::uint64_t seed_ = 0;
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> frequencies_;  // input_dim x features/2
};

/// Soft-margin linear SVM trained by Pegasos: stochastic subgradient steps on
/// hinge loss + (lambda / 2) ||w||^2 with lambda = 1 / (C n). The bias is a
/// constant input feature and shares the penalty. With an RBF kernel the rows
/// are first mapped through random Fourier features.
class LinearSvm {
 public:
  LinearSvm() = default;
  LinearSvm(Eigen::VectorXd weights, double bias, std::size_t input_dim, std::optional<RandomFourierMap> map)
      : weights_(std::move(weights)), bias_(bias), input_dim_(input_dim), map_(std::move(map)) {}

  static LinearSvm fit(const SparseRowMatrix& x, std::span<const Label> y, const SvmConfig& config);

  Eigen::VectorXd margins(const SparseRowMatrix& x) const;
  /// sigmoid(margin): >= 0.5 exactly when the margin is >= 0.
  Eigen::VectorXd scores(const SparseRowMatrix& x) const;

  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  double bias() const noexcept { return bias_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  const std::optional<RandomFourierMap>& feature_map() const noexcept { return map_; }

 private:
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
  std::size_t input_dim_ = 0;
  std::optional<RandomFourierMap> map_;
};

}  // namespace fnd
