#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "fnd/models/model.hpp"

namespace fnd {

/// Flat parameter object; nested keys only for "embedding" and "early_stopping".
nlohmann::json config_to_json(const ModelConfig& config);

/// Parameters applied over the algorithm's defaults. Unknown keys are rejected.
/// Upper-case aliases F, KS, KR, RR and D are accepted for the matching fields.
ModelConfig config_from_json(Algorithm algorithm, const nlohmann::json& params);

/// Fingerprint of the canonical configuration; the worker count is excluded.
std::string config_fingerprint(const ModelConfig& config);

nlohmann::json history_to_json(const TrainingHistory& history);
TrainingHistory history_from_json(const nlohmann::json& j);

/// Versioned structured dump. Loading reproduces predictions bit-exactly.
nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

/// Hash of the fitted parameters only.
std::string model_fingerprint(const TrainedModel& model);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace fnd
