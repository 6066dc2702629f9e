#pragma once

#include <filesystem>

#include <json.hpp>

#include "erd/mlp.hpp"

namespace erd {

inline constexpr int kCheckpointSchemaVersion = 1;

/// {schema_version, layer_dims, activation, weights, biases, seed, epochs_trained};
/// weights[l] is a list of rows.
nlohmann::json model_to_json(const MlpClassifier& model);
MlpClassifier model_from_json(const nlohmann::json& j);

void save_model(const MlpClassifier& model, const std::filesystem::path& path);
MlpClassifier load_model(const std::filesystem::path& path);

/// Pretty-printed JSON with a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace erd
