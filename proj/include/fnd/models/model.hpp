#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>

#include "fnd/embeddings.hpp"
#include "fnd/models/cnn.hpp"
#include "fnd/models/common.hpp"
#include "fnd/models/forest.hpp"
#include "fnd/models/gbt.hpp"
#include "fnd/models/lstm.hpp"
#include "fnd/models/mlp.hpp"
#include "fnd/models/svm.hpp"
#include "fnd/vectorize.hpp"

namespace fnd {

struct MlpConfig {
  std::size_t hidden_layers = 1;
  std::size_t units = 10;
  std::size_t epochs = 1000;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double l2 = 0.0;
  std::uint64_t seed = 0;
  std::optional<EarlyStopping> early_stopping;

  void validate() const;
};

/// Trainable embeddings are learned from scratch at `dim`; fixed ones come
/// from a pre-trained table passed at training time, whose width must equal `dim`.
struct EmbeddingConfig {
  bool trainable = true;
  std::size_t dim = 50;
  /// Pre-trained vector file for fixed embeddings.
  std::string source;
  OovPolicy oov = OovPolicy::ZeroVector;
};

struct CnnConfig {
  std::size_t filters = 16;
  std::size_t kernel_size = 10;
  std::size_t dense_units = 12;
  double kr = 0.0;
  EmbeddingConfig embedding;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::optional<EarlyStopping> early_stopping;

  void validate() const;
};

struct LstmConfig {
  std::size_t units = 8;
  double kr = 0.0;
  double rr = 0.0;
  double dropout = 0.0;
  EmbeddingConfig embedding;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::optional<EarlyStopping> early_stopping;

  void validate() const;
};

/// Predicts one label for every input, with score 1 (FAKE) or 0 (TRUE).
struct ConstantConfig {
  Label label = Label::Fake;
  std::uint64_t seed = 0;

  void validate() const {}
};

struct ConstantModel {
  Label label = Label::Fake;
};

using ModelConfig = std::variant<SvmConfig, ForestConfig, GbtConfig, MlpConfig, CnnConfig, LstmConfig, ConstantConfig>;
using ModelState = std::variant<LinearSvm, RandomForest, GradientBoostedTrees, nn::Mlp<float>, nn::TextCnn<float>,
                                nn::TextLstm<float>, ConstantModel>;

Algorithm algorithm_of(const ModelConfig& config) noexcept;
/// Default configuration for an algorithm.
ModelConfig default_config(Algorithm algorithm);
/// Seed stored in a configuration.
std::uint64_t seed_of(const ModelConfig& config) noexcept;
void set_seed(ModelConfig& config, std::uint64_t seed) noexcept;
void validate(const ModelConfig& config);

struct TrainedModel {
  Algorithm algorithm = Algorithm::Svm;
  ModelConfig config;
  /// Hash of the canonical configuration (worker count excluded).
  std::string config_fingerprint;
  /// Representation of the training features; predict requires the same one.
  std::string representation;
  TrainingHistory history;
  ModelState state;
};

template <class Input>
struct DevSet {
  const Input* x = nullptr;
  std::span<const Label> y;
};

TrainedModel train_svm(const FeatureMatrix& x, std::span<const Label> y, const SvmConfig& config);
TrainedModel train_random_forest(const FeatureMatrix& x, std::span<const Label> y, const ForestConfig& config);
TrainedModel train_gbt(const FeatureMatrix& x, std::span<const Label> y, const GbtConfig& config);
TrainedModel train_mlp(const FeatureMatrix& x, std::span<const Label> y, const MlpConfig& config,
                       const DevSet<FeatureMatrix>* dev = nullptr);
/// `fixed` is required when the configuration asks for a fixed embedding.
TrainedModel train_cnn_text(const SequenceBatch& s, std::span<const Label> y, const CnnConfig& config,
                            const EmbeddingTable* fixed = nullptr, const DevSet<SequenceBatch>* dev = nullptr);
TrainedModel train_lstm_text(const SequenceBatch& s, std::span<const Label> y, const LstmConfig& config,
                             const EmbeddingTable* fixed = nullptr, const DevSet<SequenceBatch>* dev = nullptr);

TrainedModel train_constant(const std::string& representation, std::span<const Label> y, const ConstantConfig& config);

/// Dispatch on the configuration type. Sparse-feature algorithms and the constant baseline.
TrainedModel train(const ModelConfig& config, const FeatureMatrix& x, std::span<const Label> y,
                   const DevSet<FeatureMatrix>* dev = nullptr);
/// Dispatch on the configuration type. Sequence algorithms and the constant baseline.
TrainedModel train(const ModelConfig& config, const SequenceBatch& s, std::span<const Label> y,
                   const EmbeddingTable* fixed = nullptr, const DevSet<SequenceBatch>* dev = nullptr);

/// Throws RepresentationMismatch when the input was not built like the training features.
Prediction predict(const TrainedModel& model, const FeatureMatrix& x);
Prediction predict(const TrainedModel& model, const SequenceBatch& s);

}  // namespace fnd
