#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fnd/eval/metrics.hpp"

namespace fnd {

struct IterationResult {
  std::size_t iteration = 0;
  std::uint64_t seed = 0;
  std::size_t train_size = 0;
  std::size_t dev_size = 0;
  std::size_t test_size = 0;
  std::optional<double> dev_accuracy;
  double test_accuracy = 0.0;
  /// Accuracy on an additional evaluation corpus (the translated set in scheme 4).
  std::optional<double> external_accuracy;
  /// Epochs actually run, for neural models.
  std::optional<std::size_t> epochs;
  std::string model_fingerprint;
};

/// Outcome of repeated train/evaluate runs of one configuration.
struct EvalReport {
  std::string name;
  std::string algorithm;
  nlohmann::json model_config;
  nlohmann::json pipeline;
  nlohmann::json plan;
  std::string corpus;
  std::string external_corpus;
  std::uint64_t seed = 0;
  /// Grid overrides that produced this configuration (empty object outside grids).
  nlohmann::json overrides = nlohmann::json::object();
  std::vector<IterationResult> iterations;
  std::optional<MeanStd> dev;
  MeanStd test;
  std::optional<MeanStd> external;
  /// Row-normalized test confusion over all iterations pooled.
  Eigen::Matrix2d confusion = Eigen::Matrix2d::Zero();
  std::optional<Eigen::Matrix2d> external_confusion;
  /// Hash of everything that determines the results.
  std::string config_fingerprint;
  /// Fingerprint of the experiment spec that produced the report, when any.
  std::string spec_fingerprint;
  std::vector<std::string> warnings;
  /// Not part of any fingerprint.
  double wall_clock_seconds = 0.0;
};

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);

/// Report JSON without the wall-clock field; equal across identical re-runs.
nlohmann::json deterministic_payload(const EvalReport& report);

struct GridReport {
  std::string name;
  /// "dev_acc" when every report has dev scores, else "test_acc".
  std::string criterion;
  /// In grid enumeration order.
  std::vector<EvalReport> reports;
  /// Indices into reports, best first.
  std::vector<std::size_t> ranking;
  std::size_t best = 0;
  std::string spec_fingerprint;
  double wall_clock_seconds = 0.0;
};

nlohmann::json to_json(const GridReport& report);
GridReport grid_report_from_json(const nlohmann::json& j);

struct CurvePoint {
  std::size_t n = 0;
  std::size_t train_size = 0;
  std::size_t holdout_size = 0;
  /// Empty when the holdout is empty (n equals the translated corpus size).
  std::vector<double> accuracies;
  MeanStd accuracy;
};

struct CurveReport {
  std::string name;
  std::string algorithm;
  nlohmann::json model_config;
  nlohmann::json pipeline;
  std::string base_corpus;
  std::string translated_corpus;
  std::uint64_t seed = 0;
  std::vector<CurvePoint> points;
  std::string config_fingerprint;
  std::string spec_fingerprint;
  std::vector<std::string> warnings;
  double wall_clock_seconds = 0.0;
};

nlohmann::json to_json(const CurveReport& report);
CurveReport curve_report_from_json(const nlohmann::json& j);

/// Flat results table: one row per configuration x iteration.
void write_results_csv(std::ostream& out, const std::vector<EvalReport>& reports);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace fnd
