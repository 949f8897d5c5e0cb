#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fnd/corpus.hpp"

namespace fnd {

/// Constant is a baseline that ignores its input.
enum class Algorithm { Svm, RandomForest, Gbt, Mlp, Cnn, Lstm, Constant };

std::string_view to_string(Algorithm algorithm) noexcept;
Algorithm parse_algorithm(std::string_view text);

/// Sequence models consume id sequences; the others consume sparse rows.
constexpr bool is_sequence_model(Algorithm a) noexcept { return a == Algorithm::Cnn || a == Algorithm::Lstm; }

/// Score = P(FAKE) or a margin mapped into [0, 1]. A score of exactly 0.5 is FAKE.
constexpr Label label_from_score(double score) noexcept { return score >= 0.5 ? Label::Fake : Label::True; }

struct Prediction {
  std::vector<Label> labels;
  Eigen::VectorXd scores;
};

Prediction prediction_from_scores(Eigen::VectorXd scores);

/// 1.0 for FAKE, 0.0 for TRUE.
Eigen::VectorXd to_targets(std::span<const Label> labels);

/// Throws SingleClassInput unless both classes occur.
void require_two_classes(std::span<const Label> labels);

struct EarlyStopping {
  /// Minimum dev-accuracy gain that counts as an improvement.
  double tolerance = 0.0;
  /// Epochs without improvement before training halts.
  std::size_t patience = 3;
  bool restore_best = true;
};

struct TrainingHistory {
  /// Full-training-set loss before the first update (gradient models) or of
  /// the initial constant model (boosting).
  double initial_loss = 0.0;
  /// Per epoch (neural models) or per stage (boosting).
  std::vector<double> loss;
  std::vector<double> dev_accuracy;
  std::optional<std::size_t> best_epoch;
  std::optional<double> best_dev_accuracy;
  bool stopped_early = false;
};

}  // namespace fnd
