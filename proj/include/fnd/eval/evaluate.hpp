#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fnd/corpus.hpp"
#include "fnd/embeddings.hpp"
#include "fnd/eval/pipeline.hpp"
#include "fnd/eval/report.hpp"
#include "fnd/models/model.hpp"

namespace fnd {

struct EvalOptions {
  std::string name;
  /// Worker threads across iterations or grid points; results do not depend on it.
  std::size_t jobs = 1;
  /// Also scored in every iteration, never used for fitting.
  const Corpus* external = nullptr;
  /// Pre-loaded vectors for fixed embeddings; loaded from the configured
  /// source on demand when absent.
  std::shared_ptr<const EmbeddingFile> embeddings;
};

/// Everything one train/score round produces.
struct IterationOutcome {
  TrainedModel model;
  FittedPipeline pipeline;
  Prediction dev;
  Prediction test;
  std::optional<Prediction> external;
};

/// Tokenized corpus shared by all iterations.
struct PreparedCorpus {
  const Corpus* corpus = nullptr;
  std::vector<TokenizedDoc> tokens;
  std::vector<Label> labels;
  std::vector<std::string> ids;
};

PreparedCorpus prepare(const Corpus& corpus, const NormalizerConfig& normalize);

/// Fits preprocessing on split.train only, trains, then scores dev, test and
/// the optional external corpus.
IterationOutcome fit_and_score(const ModelConfig& model, const PipelineConfig& pipeline, const PreparedCorpus& data,
                               const SplitIndices& split, const PreparedCorpus* external = nullptr,
                               const EmbeddingFile* embeddings = nullptr);

/// Repeated ShuffleSplit evaluation. Iteration i trains with the model seed
/// derived from (model seed, i).
EvalReport bootstrap_evaluate(const ModelConfig& model, const Corpus& corpus, const SplitPlan& plan,
                              const PipelineConfig& pipeline, const EvalOptions& options = {});

/// One axis of a grid: a dotted override key and its candidate values.
struct GridAxis {
  std::string key;
  std::vector<nlohmann::json> values;
};

/// Cartesian product enumerated with the last axis varying fastest.
struct Grid {
  std::vector<GridAxis> axes;

  std::size_t size() const;
  std::vector<nlohmann::json> points() const;
};

/// Applies a dotted override. Keys: model.params.<name> (nested with dots),
/// normalize.{lowercase,strip_non_alnum,stop_words,stemming},
/// represent.{kind,vocab_size,max_len,oov}. Boolean stop_words/stemming pick
/// the list or stemmer of `language`. Throws SpecValidation otherwise.
void apply_override(const std::string& key, const nlohmann::json& value, ModelConfig& model, PipelineConfig& pipeline,
                    Language language);

struct Candidate {
  ModelConfig model;
  PipelineConfig pipeline;
  nlohmann::json overrides = nlohmann::json::object();
};

std::vector<Candidate> expand_grid(const Grid& grid, const ModelConfig& model, const PipelineConfig& pipeline,
                                   Language language);

/// Ranks reports by mean dev accuracy when all have dev scores, else by mean
/// test accuracy; ties keep enumeration order.
GridReport rank_reports(std::vector<EvalReport> reports);

GridReport grid_search(std::span<const Candidate> candidates, const Corpus& corpus, const SplitPlan& plan,
                       const EvalOptions& options = {});

inline const std::vector<std::size_t> kDefaultCurvePoints{500, 1000, 1500, 2000, 2500};

struct CurveOptions {
  std::vector<std::size_t> points = kDefaultCurvePoints;
  /// Independent mixes per point.
  std::size_t repeats = 5;
  /// Share of each mixed training set held out for dev monitoring (early stopping).
  double dev_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// For each n: move n translated documents into training, retrain from
/// scratch, score the translated remainder. Points are reported in
/// ascending n.
CurveReport learning_curve(const ModelConfig& model, const PipelineConfig& pipeline, const Corpus& base_train,
                           const Corpus& translated, const CurveOptions& curve, const EvalOptions& options = {});

}  // namespace fnd
