#include "erd/baselines.hpp"

#include <optional>

#include "erd/checkpoint.hpp"
#include "erd/error.hpp"

namespace erd {

namespace {

std::vector<std::size_t> layer_dims(std::size_t input, const std::vector<std::size_t>& hidden,
                                    std::size_t classes) {
  std::vector<std::size_t> dims{input};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(classes);
  return dims;
}

}  // namespace

VanillaEnsemble vanilla_fit(const Dataset& s, const Dataset& v, const VanillaOptions& options) {
  if (options.k < 1) throw ArityError("vanilla ensemble needs at least one member");
  if (s.empty() || v.empty()) throw ValidationError("vanilla ensemble needs non-empty S and V");
  const std::vector<double> rates = options.learning_rates.empty()
                                        ? std::vector<double>{options.train.learning_rate}
                                        : options.learning_rates;
  const auto dims = layer_dims(s.dim(), options.hidden, static_cast<std::size_t>(s.num_classes));

  VanillaEnsemble out;
  for (std::size_t i = 0; i < options.k; ++i) {
    const std::uint64_t seed = options.same_seed ? options.train.seed : options.train.seed + i;
    std::optional<MlpClassifier> best;
    double best_val = -1.0;
    std::size_t best_epoch = 0;
    double best_rate = 0.0;
    for (double rate : rates) {
      TrainConfig cfg = options.train;
      cfg.learning_rate = rate;
      cfg.seed = seed;
      auto init = MlpClassifier::initialized(dims, options.activation, seed);
      sgd_train(std::move(init), s, cfg, [&](const EpochStats& st, const MlpClassifier& m) {
        const double acc = accuracy(m, v);
        if (acc > best_val) {
          best_val = acc;
          best = m;
          best_epoch = st.epoch;
          best_rate = rate;
        }
      });
    }
    out.members.push_back(std::move(*best));
    out.stop_epochs.push_back(best_epoch);
    out.learning_rates.push_back(best_rate);
  }
  return out;
}

BinaryDiscriminator binary_fit(const Dataset& s, const Dataset& u, const Dataset& v_id,
                               const BinaryOptions& options) {
  if (u.empty()) throw ValidationError("binary discriminator needs a non-empty unlabeled set");
  if (s.empty() || v_id.empty()) throw ValidationError("binary discriminator needs S and V");
  Dataset train = concat(s, u);
  train.num_classes = 2;
  for (std::size_t i = 0; i < train.size(); ++i) train.labels[i] = i < s.size() ? 0 : 1;

  std::vector<double> weights;
  if (options.balance_classes && s.size() != u.size()) {
    const auto n = static_cast<double>(train.size());
    const double w0 = n / (2.0 * static_cast<double>(s.size()));
    const double w1 = n / (2.0 * static_cast<double>(u.size()));
    weights.resize(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) weights[i] = i < s.size() ? w0 : w1;
  }
  Dataset holdout = v_id;
  holdout.num_classes = 2;
  std::fill(holdout.labels.begin(), holdout.labels.end(), 0);

  BinaryDiscriminator out;
  std::optional<MlpClassifier> best;
  double best_acc = -1.0;
  auto init = MlpClassifier::initialized(layer_dims(s.dim(), options.hidden, 2),
                                         options.activation, options.train.seed);
  auto result = sgd_train(
      std::move(init), train, options.train,
      [&](const EpochStats& st, const MlpClassifier& m) {
        const double acc = accuracy(m, holdout);
        out.holdout_accuracy.push_back(acc);
        if (options.early_stopping && acc > best_acc) {
          best_acc = acc;
          best = m;
          out.stop_epoch = st.epoch;
        }
      },
      weights);
  if (options.early_stopping) {
    out.model = std::move(*best);
  } else {
    out.model = std::move(result.model);
    out.stop_epoch = options.train.max_epochs;
  }
  return out;
}

std::vector<double> binary_scores(const BinaryDiscriminator& disc, const Matrix& x) {
  const Matrix p = forward_batch(disc.model, x);
  std::vector<double> out(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) out[i] = p(i, 1);
  return out;
}

void save_vanilla(const VanillaEnsemble& e, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["kind"] = "vanilla";
  manifest["artificial_labels"] = nlohmann::json::array();
  manifest["stop_epochs"] = e.stop_epochs;
  manifest["learning_rates"] = e.learning_rates;
  manifest["statistic_defaults"] = {{"statistic", "entropy_avg"}, {"target_fpr", 0.05}};
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < e.members.size(); ++i) {
    const std::string name = "member_" + std::to_string(i) + ".json";
    save_model(e.members[i], dir / name);
    files.push_back(name);
  }
  manifest["members"] = files;
  write_json(manifest, dir / "manifest.json");
}

VanillaEnsemble load_vanilla(const std::filesystem::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  if (manifest.value("kind", "") != "vanilla") throw ValidationError("not a vanilla ensemble");
  VanillaEnsemble e;
  e.stop_epochs = manifest.at("stop_epochs").get<std::vector<std::size_t>>();
  e.learning_rates = manifest.value("learning_rates", std::vector<double>{});
  for (const auto& name : manifest.at("members")) {
    e.members.push_back(load_model(dir / name.get<std::string>()));
  }
  return e;
}

void save_binary(const BinaryDiscriminator& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["kind"] = "binary";
  manifest["artificial_labels"] = nlohmann::json::array();
  manifest["stop_epochs"] = {b.stop_epoch};
  manifest["holdout_accuracy"] = b.holdout_accuracy;
  manifest["statistic_defaults"] = {{"statistic", "p_unlabeled"}, {"target_fpr", 0.05}};
  manifest["members"] = {"member_0.json"};
  save_model(b.model, dir / "member_0.json");
  write_json(manifest, dir / "manifest.json");
}

BinaryDiscriminator load_binary(const std::filesystem::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  if (manifest.value("kind", "") != "binary") throw ValidationError("not a binary discriminator");
  BinaryDiscriminator b;
  b.stop_epoch = manifest.at("stop_epochs").at(0).get<std::size_t>();
  b.holdout_accuracy = manifest.value("holdout_accuracy", std::vector<double>{});
  b.model = load_model(dir / "member_0.json");
  return b;
}

}  // namespace erd
