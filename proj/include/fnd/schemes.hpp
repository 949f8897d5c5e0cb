#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fnd/corpus.hpp"
#include "fnd/eval/evaluate.hpp"

namespace fnd {

enum class Scheme { ClassicalEs = 1, NeuralEs = 2, NeuralEn = 3, CrossLingual = 4, Curve = 5 };

std::string_view to_string(Scheme scheme) noexcept;
/// Accepts "1".."4" and "curve".
Scheme parse_scheme(std::string_view text);

/// One named corpus in a datasets manifest: either a CSV file with its column
/// mapping, or a merge of other entries.
struct DatasetEntry {
  std::string name;
  std::filesystem::path path;
  CsvSchema schema;
  Language language = Language::En;
  std::vector<std::string> merge;
};

/// Named dataset bindings. Relative paths resolve against the manifest's directory.
class DatasetManifest {
 public:
  static DatasetManifest load(const std::filesystem::path& path);
  static DatasetManifest parse(const std::string& yaml, const std::filesystem::path& base_dir = {});

  bool contains(const std::string& name) const { return entries_.contains(name); }
  const DatasetEntry& at(const std::string& name) const;
  /// Resolved language (merges inherit the shared language of their parts).
  Language language(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Loads (and merges) the corpus. Throws MissingFile for absent CSV files.
  Corpus load_corpus(const std::string& name, std::vector<std::pair<std::string, LoadStats>>* stats = nullptr) const;

 private:
  std::map<std::string, DatasetEntry> entries_;
};

/// Declarative experiment description.
struct ExperimentSpec {
  std::string name;
  Scheme scheme = Scheme::ClassicalEs;
  std::string train;
  /// Defaults to `train` for schemes 1-3.
  std::string validate;
  /// Optional stratified subsample size of the training corpus.
  std::optional<std::size_t> subsample;
  Algorithm family = Algorithm::Svm;
  nlohmann::json params = nlohmann::json::object();
  /// normalize.* and represent.* settings in file order, applied over scheme defaults.
  std::vector<std::pair<std::string, nlohmann::json>> preprocessing;
  SplitPlan split;
  Grid grid;
  CurveOptions curve;
  std::uint64_t seed = 0;
  std::filesystem::path output;

  /// Model configuration with params applied and the master-derived seed.
  ModelConfig model() const;
  /// Scheme defaults, then the preprocessing settings of the spec.
  PipelineConfig pipeline(Language language) const;
  SplitPlan plan() const;
  CurveOptions curve_options() const;
};

/// Throws SpecValidation on syntax errors, unknown keys or mistyped values.
ExperimentSpec parse_spec(const std::string& yaml);
ExperimentSpec load_spec(const std::filesystem::path& path);

/// Canonical form; the spec fingerprint hashes it.
nlohmann::json to_json(const ExperimentSpec& spec);
std::string spec_fingerprint(const ExperimentSpec& spec);

/// Structural checks. Dataset bindings are checked only when a manifest is given.
std::vector<std::string> validate_spec(const ExperimentSpec& spec, const DatasetManifest* manifest = nullptr);

struct RunOptions {
  std::size_t jobs = 1;
  /// Overrides spec.output when non-empty.
  std::filesystem::path output;
  /// Skip writing files.
  bool persist = true;
};

struct ExperimentResult {
  std::optional<EvalReport> report;
  std::optional<GridReport> grid;
  std::optional<CurveReport> curve;
  /// Files written, in order.
  std::vector<std::filesystem::path> files;
};

/// Throws SpecValidation listing every violation when the spec does not validate.
ExperimentResult run_experiment(const ExperimentSpec& spec, const DatasetManifest& manifest,
                                const RunOptions& options = {});

/// Size, class balance, and token-length histogram of one corpus.
nlohmann::json corpus_statistics(const Corpus& corpus, const NormalizerConfig& tokenizer, double percentile = 0.9);

}  // namespace fnd
