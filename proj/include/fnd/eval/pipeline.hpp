#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>

#include "json.hpp"

#include "fnd/corpus.hpp"
#include "fnd/textnorm.hpp"
#include "fnd/vectorize.hpp"

namespace fnd {

enum class Representation { Bow, Tfidf, Sequence };

std::string_view to_string(Representation r) noexcept;
Representation parse_representation(std::string_view text);

/// Preprocessing knobs from raw text to model input.
struct PipelineConfig {
  NormalizerConfig normalize;
  Representation representation = Representation::Tfidf;
  std::size_t vocab_size = 10000;
  /// Sequence length for id sequences.
  std::size_t max_len = 500;
  OovMode oov = OovMode::UnkColumn;

  std::string canonical() const;
};

nlohmann::json to_json(const PipelineConfig& config);
/// Inverse of to_json; throws SpecValidation on missing or invalid fields.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

using Features = std::variant<FeatureMatrix, SequenceBatch>;

/// Vocabulary (and idf weights for tf-idf) fitted on training documents only.
class FittedPipeline {
 public:
  static FittedPipeline fit(const PipelineConfig& config, std::span<const TokenizedDoc> train_docs,
                            std::span<const std::string> train_ids);

  /// Reassembles a fitted pipeline from saved parts.
  static FittedPipeline restore(PipelineConfig config, Vocabulary vocab, std::optional<TfidfWeights> idf);

  Features transform(std::span<const TokenizedDoc> docs) const;

  const PipelineConfig& config() const noexcept { return config_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  const std::optional<TfidfWeights>& idf() const noexcept { return idf_; }

 private:
  PipelineConfig config_;
  Vocabulary vocab_;
  std::optional<TfidfWeights> idf_;
};

/// Config, vocabulary and idf weights; enough to transform new documents.
nlohmann::json to_json(const FittedPipeline& pipeline);
FittedPipeline fitted_pipeline_from_json(const nlohmann::json& j);

/// Tokenizes every document of the corpus once.
std::vector<TokenizedDoc> tokenize_corpus(const Corpus& corpus, const NormalizerConfig& config);

std::vector<TokenizedDoc> select(std::span<const TokenizedDoc> docs, std::span<const std::size_t> indices);

}  // namespace fnd
