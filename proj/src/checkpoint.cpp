#include "erd/checkpoint.hpp"

#include <fstream>

#include "erd/error.hpp"

namespace erd {

nlohmann::json model_to_json(const MlpClassifier& model) {
  nlohmann::json j;
  j["schema_version"] = kCheckpointSchemaVersion;
  j["layer_dims"] = model.layer_dims;
  j["activation"] = to_string(model.activation);
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : model.weights) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < w.rows(); ++r) {
      auto row = w.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    weights.push_back(std::move(rows));
  }
  j["weights"] = std::move(weights);
  j["biases"] = model.biases;
  j["seed"] = model.seed;
  j["epochs_trained"] = model.epochs_trained;
  return j;
}

MlpClassifier model_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kCheckpointSchemaVersion) {
      throw ValidationError("unsupported checkpoint schema_version " + std::to_string(version));
    }
    MlpClassifier m;
    m.layer_dims = j.at("layer_dims").get<std::vector<std::size_t>>();
    m.activation = parse_activation(j.at("activation").get<std::string>());
    for (const auto& rows : j.at("weights")) {
      const std::size_t r = rows.size();
      const std::size_t c = r == 0 ? 0 : rows.at(0).size();
      std::vector<double> data;
      data.reserve(r * c);
      for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("ragged weight matrix in checkpoint");
        for (const auto& v : row) data.push_back(v.get<double>());
      }
      m.weights.emplace_back(r, c, std::move(data));
    }
    m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.epochs_trained = j.at("epochs_trained").get<std::size_t>();
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model checkpoint: ") + e.what());
  }
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_model(const MlpClassifier& model, const std::filesystem::path& path) {
  write_json(model_to_json(model), path);
}

MlpClassifier load_model(const std::filesystem::path& path) {
  return model_from_json(read_json(path));
}

}  // namespace erd
