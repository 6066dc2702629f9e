#include "erd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "erd/error.hpp"
#include "erd/rng.hpp"
#include "erd/synthetic2d.hpp"
#include "erd/theory.hpp"

namespace erd::exp {

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config field '") + key + "': " + e.what());
  }
}

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(std::string("config is missing field '") + key + "'");
  }
  return j.at(key);
}

}  // namespace

// ---------------------------------------------------------------------------

TrainConfig train_config_from_json(const json& j, TrainConfig d) {
  if (j.is_null()) return d;
  if (!j.is_object()) throw ValidationError("train config must be an object");
  TrainConfig c = d;
  c.learning_rate = get_or(j, "learning_rate", d.learning_rate);
  if (j.contains("batch_size")) {
    const auto& b = j.at("batch_size");
    if (b.is_string()) {
      if (b.get<std::string>() != "full") throw ValidationError("batch_size must be a count or \"full\"");
      c.batch_size = kFullBatch;
    } else {
      const auto v = b.get<long long>();
      if (v < 1) throw ValidationError("batch_size must be >= 1 or \"full\"");
      c.batch_size = static_cast<std::size_t>(v);
    }
  }
  if (j.contains("max_epochs")) {
    const auto v = j.at("max_epochs").get<long long>();
    if (v < 1) throw ValidationError("max_epochs must be >= 1");
    c.max_epochs = static_cast<std::size_t>(v);
  }
  c.seed = get_or<std::uint64_t>(j, "seed", d.seed);
  c.l2_coefficient = get_or(j, "l2_coefficient", d.l2_coefficient);
  if (j.contains("loss")) c.loss = parse_loss(j.at("loss").get<std::string>());
  c.validate();
  return c;
}

json to_json(const TrainConfig& c) {
  json j;
  j["learning_rate"] = c.learning_rate;
  if (c.batch_size == kFullBatch) {
    j["batch_size"] = "full";
  } else {
    j["batch_size"] = c.batch_size;
  }
  j["max_epochs"] = c.max_epochs;
  j["seed"] = c.seed;
  j["l2_coefficient"] = c.l2_coefficient;
  j["loss"] = to_string(c.loss);
  return j;
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names() {
  return {"clusterable-k6", "bands-2d", "moons-2d", "blobs-far-ood"};
}

json preset_recipe(std::string_view name) {
  if (name == "clusterable-k6") {
    return {{"preset", "clusterable-k6"},
            {"kind", "clusterable"},
            {"seed", 1},
            {"clusters", 6},
            {"dim", 16},
            {"cluster_labels", {0, 1, 2, 3, 4, 5}},
            {"ood_clusters", {false, false, false, true, true, true}},
            {"sizes", {1300, 1300, 1300, 600, 600, 600}},
            {"epsilon", 0.3},
            {"rho", 0.0},
            {"alpha1", 0.5},
            {"alpha2", 2.0},
            {"min_center_distance", 1.0},
            {"split",
             {{"train", 0.45},
              {"val", 0.1},
              {"test", 0.15},
              {"ood_ratio", 0.5},
              {"unlabeled_size", 1000}}}};
  }
  if (name == "bands-2d") {
    return {{"preset", "bands-2d"},
            {"kind", "2d"},
            {"task", "bands"},
            {"seed", 1},
            {"n", 2000},
            {"noise", 0.05},
            {"ood",
             {{"shape", "band"},
              {"n", 1000},
              {"y_center", 3.0},
              {"half_width", 0.4},
              {"x_min", -3.0},
              {"x_max", 3.0},
              {"noise", 0.05}}},
            {"split",
             {{"train", 0.4},
              {"val", 0.1},
              {"test", 0.2},
              {"ood_ratio", 0.5},
              {"unlabeled_size", 800}}}};
  }
  if (name == "moons-2d") {
    return {{"preset", "moons-2d"},
            {"kind", "2d"},
            {"task", "moons"},
            {"seed", 1},
            {"n", 2000},
            {"noise", 0.1},
            {"ood", {{"shape", "blob"}, {"n", 1000}, {"center", {-0.8, -0.9}}, {"stddev", 0.15}}},
            {"split",
             {{"train", 0.4},
              {"val", 0.1},
              {"test", 0.2},
              {"ood_ratio", 0.5},
              {"unlabeled_size", 800}}}};
  }
  if (name == "blobs-far-ood") {
    return {{"preset", "blobs-far-ood"},
            {"kind", "2d"},
            {"task", "blobs"},
            {"seed", 1},
            {"n", 1000},
            {"noise", 0.3},
            {"ood", {{"shape", "blob"}, {"n", 600}, {"center", {0.0, 6.0}}, {"stddev", 0.3}}},
            {"split",
             {{"train", 0.4},
              {"val", 0.1},
              {"test", 0.2},
              {"ood_ratio", 0.5},
              {"unlabeled_size", 400}}}};
  }
  std::string known;
  for (const auto& n : preset_names()) known += " " + n;
  throw ValidationError("unknown preset '" + std::string(name) + "'; known:" + known);
}

json resolve_recipe(const json& config) {
  if (!config.is_object()) throw ValidationError("data recipe must be a JSON object");
  if (!config.contains("preset")) return config;
  json recipe = preset_recipe(config.at("preset").get<std::string>());
  recipe.merge_patch(config);
  return recipe;
}

namespace {

SplitFractions fractions_from_json(const json& s) {
  SplitFractions f;
  f.train = get_or(s, "train", f.train);
  f.val = get_or(s, "val", f.val);
  f.test = get_or(s, "test", f.test);
  return f;
}

Dataset make_ood_group(const json& ood, std::uint64_t seed) {
  const std::string shape = require(ood, "shape").get<std::string>();
  const auto n = require(ood, "n").get<std::size_t>();
  constexpr int kOodLabel = 2;
  if (shape == "band") {
    return make_band_2d(n, get_or(ood, "y_center", 3.0), get_or(ood, "half_width", 0.4),
                        get_or(ood, "x_min", -3.0), get_or(ood, "x_max", 3.0),
                        get_or(ood, "noise", 0.0), kOodLabel, seed);
  }
  if (shape == "blob") {
    const auto c = get_or(ood, "center", std::vector<double>{0.0, 0.0});
    if (c.size() != 2) throw ValidationError("ood blob center must have 2 coordinates");
    return make_blob_2d(n, c[0], c[1], get_or(ood, "stddev", 0.1), kOodLabel, seed);
  }
  throw ValidationError("unknown ood shape '" + shape + "' (expected band|blob)");
}

}  // namespace

BuiltData build_data(const json& config) {
  BuiltData out;
  out.recipe = resolve_recipe(config);
  const json& r = out.recipe;
  const std::string kind = require(r, "kind").get<std::string>();
  const auto seed = get_or<std::uint64_t>(r, "seed", 0);
  const json split_cfg = get_or(r, "split", json::object());
  const SplitFractions fractions = fractions_from_json(split_cfg);
  const double ood_ratio = get_or(split_cfg, "ood_ratio", 0.5);
  const auto unlabeled_size = get_or<std::size_t>(split_cfg, "unlabeled_size", 0);

  if (kind == "clusterable") {
    ClusterableSpec spec;
    const auto k = require(r, "clusters").get<std::size_t>();
    const auto d = require(r, "dim").get<std::size_t>();
    spec.centers = random_unit_centers(k, d, get_or(r, "min_center_distance", 1.0),
                                       derive_seed(seed, 1));
    spec.cluster_labels = require(r, "cluster_labels").get<std::vector<int>>();
    spec.ood_cluster_flags = get_or(r, "ood_clusters", std::vector<bool>(k, false));
    spec.sizes = require(r, "sizes").get<std::vector<std::size_t>>();
    spec.epsilon = get_or(r, "epsilon", 0.1);
    spec.rho = get_or(r, "rho", 0.0);
    spec.alpha1 = get_or(r, "alpha1", 0.5);
    spec.alpha2 = get_or(r, "alpha2", 2.0);
    spec.num_classes = get_or(r, "num_classes", 0);
    spec.seed = derive_seed(seed, 2);
    auto pool = generate_clusterable(spec);
    out.split = make_ssnd_split(pool, spec, fractions, ood_ratio, unlabeled_size,
                                derive_seed(seed, 3));
    out.spec = std::move(spec);
    out.pool = std::move(pool);
    return out;
  }
  if (kind == "2d") {
    const Task2d task = parse_task2d(require(r, "task").get<std::string>());
    Dataset id = make_two_moons_like_2d(task, require(r, "n").get<std::size_t>(),
                                        get_or(r, "noise", 0.0), derive_seed(seed, 1));
    Dataset pool = id;
    std::vector<bool> flags{false, false};
    if (r.contains("ood") && !r.at("ood").is_null()) {
      pool = concat(id, make_ood_group(r.at("ood"), derive_seed(seed, 2)));
      flags.push_back(true);
    }
    const std::vector<int> groups = pool.labels;
    out.split = make_ssnd_split(pool, groups, flags, fractions, ood_ratio, unlabeled_size,
                                derive_seed(seed, 3));
    return out;
  }
  throw ValidationError("unknown data kind '" + kind + "' (expected clusterable|2d)");
}

// ---------------------------------------------------------------------------
// Pretraining

PretrainConfig pretrain_config_from_json(const json& j) {
  PretrainConfig c;
  if (j.is_null()) return c;
  c.hidden = get_or(j, "hidden", c.hidden);
  if (j.contains("activation")) c.activation = parse_activation(j.at("activation").get<std::string>());
  c.output_classes = get_or(j, "output_classes", c.output_classes);
  c.train = train_config_from_json(get_or(j, "train", json()), c.train);
  return c;
}

json to_json(const PretrainConfig& c) {
  return {{"hidden", c.hidden},
          {"activation", to_string(c.activation)},
          {"output_classes", c.output_classes},
          {"train", to_json(c.train)}};
}

PretrainResult pretrain(const SplitBundle& split, const PretrainConfig& config) {
  const auto classes = std::max<std::size_t>(config.output_classes,
                                              static_cast<std::size_t>(split.num_classes()));
  std::vector<std::size_t> dims{split.dim()};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(classes);
  auto init = MlpClassifier::initialized(dims, config.activation, derive_seed(config.train.seed, 7));

  PretrainResult out;
  std::optional<MlpClassifier> best;
  double best_val = -1.0;
  auto result = sgd_train(std::move(init), split.train, config.train,
                          [&](const EpochStats& st, const MlpClassifier& m) {
                            const double acc = accuracy(m, split.validation);
                            out.val_trace.push_back(acc);
                            if (acc > best_val) {
                              best_val = acc;
                              best = m;
                              out.best_epoch = st.epoch;
                            }
                          });
  out.model = std::move(*best);
  out.val_accuracy = best_val;
  out.trace = std::move(result.trace);
  return out;
}

// ---------------------------------------------------------------------------

ErdOptions erd_options_from_json(const json& j) {
  ErdOptions o;
  o.train = TrainConfig{0.01, 32, 30, 0, 0.0, Loss::cross_entropy};
  if (j.is_null()) return o;
  o.k = get_or<std::size_t>(j, "k", o.k);
  o.labels = get_or(j, "labels", o.labels);
  o.label_seed = get_or<std::uint64_t>(j, "label_seed", o.label_seed);
  o.parallel = get_or(j, "parallel", o.parallel);
  o.train = train_config_from_json(get_or(j, "train", json()), o.train);
  return o;
}

json to_json(const ErdOptions& o) {
  json labels = o.labels.empty() ? json(nullptr) : json(o.labels);
  return {{"k", o.k},
          {"labels", labels},
          {"label_seed", o.label_seed},
          {"parallel", o.parallel},
          {"train", to_json(o.train)}};
}

VanillaOptions vanilla_options_from_json(const json& j) {
  VanillaOptions o;
  o.train = TrainConfig{0.05, 32, 30, 0, 0.0, Loss::cross_entropy};
  if (j.is_null()) return o;
  o.k = get_or<std::size_t>(j, "k", o.k);
  o.hidden = get_or(j, "hidden", o.hidden);
  if (j.contains("activation")) o.activation = parse_activation(j.at("activation").get<std::string>());
  o.learning_rates = get_or(j, "learning_rates", o.learning_rates);
  o.same_seed = get_or(j, "same_seed", o.same_seed);
  o.train = train_config_from_json(get_or(j, "train", json()), o.train);
  return o;
}

BinaryOptions binary_options_from_json(const json& j) {
  BinaryOptions o;
  o.train = TrainConfig{0.05, 32, 30, 0, 0.0, Loss::cross_entropy};
  if (j.is_null()) return o;
  o.hidden = get_or(j, "hidden", o.hidden);
  if (j.contains("activation")) o.activation = parse_activation(j.at("activation").get<std::string>());
  o.early_stopping = get_or(j, "early_stopping", o.early_stopping);
  o.balance_classes = get_or(j, "balance_classes", o.balance_classes);
  o.train = train_config_from_json(get_or(j, "train", json()), o.train);
  return o;
}

EvalOutcome evaluate_scores(const std::vector<double>& validation_scores,
                            const std::vector<double>& test_scores,
                            const std::vector<bool>& test_truth, double target_fpr) {
  std::vector<double> id;
  std::vector<double> ood;
  partition_scores(test_scores, test_truth, id, ood);
  EvalOutcome out;
  out.roc = roc(id, ood);
  out.threshold_at_fpr05 = threshold_for_fpr(validation_scores, target_fpr);
  out.test_fpr_at_threshold = flagged_fraction(id, out.threshold_at_fpr05);
  out.test_tpr_at_threshold = flagged_fraction(ood, out.threshold_at_fpr05);
  return out;
}

json to_json(const EvalOutcome& e) {
  json j = roc_summary(e.roc, e.threshold_at_fpr05);
  j["test_fpr_at_threshold"] = e.test_fpr_at_threshold;
  j["test_tpr_at_threshold"] = e.test_tpr_at_threshold;
  return j;
}

// ---------------------------------------------------------------------------
// Pipelines

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c;
  c.data = require(j, "data");
  c.pretrain = pretrain_config_from_json(get_or(j, "pretrain", json()));
  c.erd = erd_options_from_json(get_or(j, "erd", json()));
  c.k_explicit = j.contains("erd") && j.at("erd").contains("k");
  if (j.contains("statistic")) c.statistic = parse_statistic(j.at("statistic").get<std::string>());
  c.target_fpr = get_or(j, "target_fpr", c.target_fpr);
  return c;
}

namespace {

EvalOutcome evaluate_ensemble(std::span<const MlpClassifier> members, const SplitBundle& split,
                              Statistic statistic, double target_fpr) {
  const auto val = ensemble_scores(members, split.validation.features, statistic);
  const auto test = ensemble_scores(members, split.test.features, statistic);
  return evaluate_scores(val, test, split.test_truth, target_fpr);
}

}  // namespace

PipelineResult run_erd_pipeline(const PipelineConfig& config) {
  PipelineResult out;
  out.data = build_data(config.data);
  const SplitBundle& split = out.data.split;
  out.pretrained = pretrain(split, config.pretrain);
  ErdOptions erd = config.erd;
  if (!config.k_explicit && erd.labels.empty()) {
    erd.k = std::min(erd.k, out.pretrained.model.num_classes());
  }
  out.ensemble = erd_fit(out.pretrained.model, split.train, split.unlabeled, split.validation, erd,
                         split.unlabeled_truth);
  out.eval = evaluate_ensemble(out.ensemble.members, split, config.statistic, config.target_fpr);
  return out;
}

VanillaPipelineResult run_vanilla(const SplitBundle& split, const VanillaOptions& options,
                                  double target_fpr) {
  VanillaPipelineResult out;
  out.ensemble = vanilla_fit(split.train, split.validation, options);
  out.eval = evaluate_ensemble(out.ensemble.members, split, Statistic::entropy_avg, target_fpr);
  return out;
}

SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "ood_ratio") return SweepAxis::ood_ratio;
  if (s == "unlabeled_size") return SweepAxis::unlabeled_size;
  if (s == "ensemble_size") return SweepAxis::ensemble_size;
  throw ValidationError("unknown sweep axis '" + std::string(s) +
                        "' (expected ood_ratio|unlabeled_size|ensemble_size)");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::ood_ratio: return "ood_ratio";
    case SweepAxis::unlabeled_size: return "unlabeled_size";
    case SweepAxis::ensemble_size: return "ensemble_size";
  }
  return "unknown";
}

SweepConfig sweep_config_from_json(const json& j) {
  SweepConfig c;
  c.axis = parse_sweep_axis(require(j, "axis").get<std::string>());
  c.values = require(j, "values").get<std::vector<double>>();
  if (c.values.empty()) throw ValidationError("sweep needs at least one value");
  c.pipeline = pipeline_config_from_json(j);
  return c;
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  std::vector<SweepRow> rows;
  if (config.axis == SweepAxis::ensemble_size) {
    const BuiltData data = build_data(config.pipeline.data);
    const auto pre = pretrain(data.split, config.pipeline.pretrain);
    for (double v : config.values) {
      ErdOptions erd = config.pipeline.erd;
      erd.k = static_cast<std::size_t>(std::llround(v));
      erd.labels.clear();
      const auto ens = erd_fit(pre.model, data.split.train, data.split.unlabeled,
                               data.split.validation, erd, data.split.unlabeled_truth);
      const auto ev = evaluate_ensemble(ens.members, data.split, config.pipeline.statistic,
                                        config.pipeline.target_fpr);
      rows.push_back(SweepRow{v, ev.roc.auroc, ev.roc.tnr_at_tpr95});
    }
    return rows;
  }
  for (double v : config.values) {
    PipelineConfig pc = config.pipeline;
    json recipe = resolve_recipe(pc.data);
    if (config.axis == SweepAxis::ood_ratio) {
      recipe["split"]["ood_ratio"] = v;
    } else {
      recipe["split"]["unlabeled_size"] = static_cast<std::size_t>(std::llround(v));
    }
    pc.data = recipe;
    const auto result = run_erd_pipeline(pc);
    rows.push_back(SweepRow{v, result.eval.roc.auroc, result.eval.roc.tnr_at_tpr95});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Verifier

PropcheckConfig propcheck_config_from_json(const json& j) {
  PropcheckConfig c;
  if (j.is_null()) return c;
  c.clusters = get_or(j, "clusters", c.clusters);
  c.id_clusters = get_or(j, "id_clusters", c.id_clusters);
  c.dim = get_or(j, "dim", c.dim);
  c.num_labels = get_or(j, "num_labels", c.num_labels);
  c.n = get_or(j, "n", c.n);
  c.epsilon = get_or(j, "epsilon", c.epsilon);
  c.rho = get_or(j, "rho", c.rho);
  c.min_center_distance = get_or(j, "min_center_distance", c.min_center_distance);
  c.hidden = get_or(j, "hidden", c.hidden);
  c.mc_samples = get_or(j, "mc_samples", c.mc_samples);
  c.constants.c2 = get_or(j, "c2", c.constants.c2);
  c.constants.c4 = get_or(j, "c4", c.constants.c4);
  c.scan_factor = get_or(j, "scan_factor", c.scan_factor);
  c.seeds = get_or(j, "seeds", c.seeds);
  c.first_seed = get_or<std::uint64_t>(j, "first_seed", c.first_seed);
  c.required_success_rate = get_or(j, "required_success_rate", c.required_success_rate);
  return c;
}

json to_json(const PropcheckConfig& c) {
  return {{"clusters", c.clusters},
          {"id_clusters", c.id_clusters},
          {"dim", c.dim},
          {"num_labels", c.num_labels},
          {"n", c.n},
          {"epsilon", c.epsilon},
          {"rho", c.rho},
          {"min_center_distance", c.min_center_distance},
          {"hidden", c.hidden},
          {"mc_samples", c.mc_samples},
          {"c2", c.constants.c2},
          {"c4", c.constants.c4},
          {"scan_factor", c.scan_factor},
          {"seeds", c.seeds},
          {"first_seed", c.first_seed},
          {"required_success_rate", c.required_success_rate}};
}

void check_propcheck_preconditions(const PropcheckConfig& c) {
  if (c.num_labels < 2) throw ValidationError("propcheck needs |Y| >= 2");
  if (c.id_clusters < c.num_labels) {
    throw ValidationError("propcheck needs at least one ID cluster per label");
  }
  if (c.id_clusters > c.clusters) throw ValidationError("id_clusters exceeds clusters");
  if (c.clusters == 0 || c.n % c.clusters != 0) {
    throw ValidationError("n must be a positive multiple of the cluster count");
  }
  const double delta = 2.0 / static_cast<double>(c.num_labels - 1);
  if (c.rho > delta / 8.0 + 1e-12 || c.rho < 0.0) {
    throw ValidationError("rho = " + std::to_string(c.rho) + " violates rho <= delta/8 = " +
                          std::to_string(delta / 8.0) + " for |Y| = " +
                          std::to_string(c.num_labels));
  }
  if (!(c.scan_factor >= 1.0)) throw ValidationError("scan_factor must be >= 1");
  if (c.seeds == 0) throw ValidationError("propcheck needs at least one seed");
}

namespace {

enum class Role { labeled, correct_id, noisy_id, ood };

PropcheckLabelResult check_label(const PropcheckConfig& cfg, const ClusterableSpec& spec,
                                 const ClusterableBundle& pool, const TheorySchedule& schedule,
                                 int c, std::uint64_t seed) {
  const std::size_t per_cluster = cfg.n / cfg.clusters;
  const auto u_per_id_cluster = static_cast<std::size_t>(
      std::floor(cfg.rho * static_cast<double>(per_cluster) + 1e-9));

  // Build S u (U, c): from each ID cluster floor(rho |C_i|) points join U, novel clusters join U whole.
  std::mt19937_64 rng(derive_seed(seed, 100 + static_cast<std::uint64_t>(c)));
  std::vector<std::size_t> rows;
  std::vector<int> labels;
  std::vector<Role> roles;
  std::vector<int> truth;
  for (std::size_t k = 0; k < cfg.clusters; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < pool.cluster_assignment.size(); ++i) {
      if (static_cast<std::size_t>(pool.cluster_assignment[i]) == k) members.push_back(i);
    }
    const int y_star = spec.cluster_labels[k];
    const bool ood = spec.ood_cluster_flags[k];
    if (!ood) std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t m = 0; m < members.size(); ++m) {
      rows.push_back(members[m]);
      truth.push_back(y_star);
      if (ood) {
        labels.push_back(c);
        roles.push_back(Role::ood);
      } else if (m < u_per_id_cluster) {
        labels.push_back(c);
        roles.push_back(y_star == c ? Role::correct_id : Role::noisy_id);
      } else {
        labels.push_back(y_star);
        roles.push_back(Role::labeled);
      }
    }
  }
  Dataset train;
  train.features = pool.points.features.select_rows(rows);
  train.labels = labels;
  train.num_classes = static_cast<int>(cfg.num_labels);

  PropcheckLabelResult result;
  result.artificial_label = c;
  {
    std::vector<int> assignment;
    for (std::size_t r : rows) assignment.push_back(pool.cluster_assignment[r]);
    std::vector<int> effective_labels = spec.cluster_labels;
    for (std::size_t k = 0; k < cfg.clusters; ++k) {
      if (spec.ood_cluster_flags[k]) effective_labels[k] = c;
    }
    result.clusterable = check_clusterable(train, assignment, spec.centers, effective_labels,
                                           cfg.epsilon, cfg.rho, spec.alpha1, spec.alpha2)
                             .ok();
  }

  const auto scan = static_cast<std::size_t>(
      std::ceil(cfg.scan_factor * static_cast<double>(schedule.t_stop)));
  TrainConfig tc;
  tc.learning_rate = schedule.eta;
  tc.batch_size = kFullBatch;
  tc.max_epochs = std::max<std::size_t>(1, scan);
  tc.seed = derive_seed(seed, 200 + static_cast<std::uint64_t>(c));
  tc.loss = Loss::squared;

  auto net = TheoryNet::initialized(cfg.hidden, cfg.dim, cfg.num_labels, derive_seed(seed, 300));

  struct Rates {
    double s, correct, ood, noisy;
  };
  auto rates_of = [&](const std::vector<int>& pred) {
    std::array<std::size_t, 4> hit{};
    std::array<std::size_t, 4> count{};
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const auto role = static_cast<std::size_t>(roles[i]);
      ++count[role];
      const int want = roles[i] == Role::noisy_id ? truth[i] : labels[i];
      hit[role] += pred[i] == want ? 1 : 0;
    }
    auto frac = [&](Role r) {
      const auto k = static_cast<std::size_t>(r);
      return count[k] == 0 ? 1.0 : static_cast<double>(hit[k]) / static_cast<double>(count[k]);
    };
    return Rates{frac(Role::labeled), frac(Role::correct_id), frac(Role::ood),
                 frac(Role::noisy_id)};
  };
  auto record = [&](const Rates& r) {
    result.acc_s = r.s;
    result.acc_correct_id = r.correct;
    result.acc_ood_c = r.ood;
    result.noisy_true_label = r.noisy;
  };

  sgd_train(net, train, tc, [&](const EpochStats& st, const TheoryNet& m) {
    const Rates r = rates_of(m.predict(train.features));
    const bool good = r.s == 1.0 && r.correct == 1.0 && r.ood == 1.0 && r.noisy == 1.0;
    if (good) {
      ++result.good_epochs;
      if (!result.first_good_epoch) {
        result.first_good_epoch = st.epoch;
        record(r);
      }
      if (st.epoch == schedule.t_stop) result.good_at_t_stop = true;
    }
    if (!result.first_good_epoch && st.epoch == tc.max_epochs) record(r);
  });
  return result;
}

}  // namespace

PropcheckReport run_propcheck(const PropcheckConfig& config) {
  check_propcheck_preconditions(config);
  PropcheckReport report;
  report.config = config;
  std::size_t successes = 0;
  for (std::size_t s = 0; s < config.seeds; ++s) {
    const std::uint64_t seed = config.first_seed + s;
    ClusterableSpec spec;
    spec.centers = random_unit_centers(config.clusters, config.dim, config.min_center_distance,
                                       derive_seed(seed, 1));
    spec.cluster_labels.resize(config.clusters);
    spec.ood_cluster_flags.resize(config.clusters);
    for (std::size_t k = 0; k < config.clusters; ++k) {
      const bool ood = k >= config.id_clusters;
      spec.ood_cluster_flags[k] = ood;
      // novel clusters get labels outside Y
      spec.cluster_labels[k] = ood ? static_cast<int>(config.num_labels + k)
                                   : static_cast<int>(k % config.num_labels);
    }
    spec.sizes.assign(config.clusters, config.n / config.clusters);
    spec.epsilon = config.epsilon;
    spec.rho = 0.0;
    spec.alpha1 = 0.5;
    spec.alpha2 = 2.0;
    spec.seed = derive_seed(seed, 2);
    const auto pool = generate_clusterable(spec);

    const auto schedule = theory_schedule(spec.centers, Activation::tanh, config.n,
                                          config.mc_samples, derive_seed(seed, 3),
                                          config.constants);
    PropcheckSeedResult sr;
    sr.seed = seed;
    sr.eta = schedule.eta;
    sr.t_stop = schedule.t_stop;
    sr.sigma_min = schedule.sigma_min;
    sr.centers_norm = schedule.centers_norm;
    sr.success = true;
    for (std::size_t c = 0; c < config.num_labels; ++c) {
      auto lr = check_label(config, spec, pool, schedule, static_cast<int>(c), seed);
      sr.success = sr.success && lr.first_good_epoch.has_value();
      sr.labels.push_back(std::move(lr));
    }
    successes += sr.success ? 1 : 0;
    report.seeds.push_back(std::move(sr));
  }
  report.success_rate = static_cast<double>(successes) / static_cast<double>(config.seeds);
  report.passed = report.success_rate >= config.required_success_rate;
  return report;
}

json to_json(const PropcheckReport& r) {
  json seeds = json::array();
  for (const auto& s : r.seeds) {
    json labels = json::array();
    for (const auto& l : s.labels) {
      labels.push_back({{"artificial_label", l.artificial_label},
                        {"clusterable", l.clusterable},
                        {"first_good_epoch", l.first_good_epoch ? json(*l.first_good_epoch)
                                                                : json(nullptr)},
                        {"good_epochs", l.good_epochs},
                        {"good_at_t_stop", l.good_at_t_stop},
                        {"acc_s", l.acc_s},
                        {"acc_correct_id", l.acc_correct_id},
                        {"acc_ood_c", l.acc_ood_c},
                        {"noisy_true_label", l.noisy_true_label}});
    }
    seeds.push_back({{"seed", s.seed},
                     {"eta", s.eta},
                     {"t_stop", s.t_stop},
                     {"sigma_min", s.sigma_min},
                     {"centers_norm", s.centers_norm},
                     {"success", s.success},
                     {"labels", labels}});
  }
  return {{"config", to_json(r.config)},
          {"success_rate", r.success_rate},
          {"required_success_rate", r.config.required_success_rate},
          {"passed", r.passed},
          {"seeds", seeds}};
}

}  // namespace erd::exp
