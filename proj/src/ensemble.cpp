#include "erd/ensemble.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "erd/checkpoint.hpp"
#include "erd/error.hpp"
#include "erd/rng.hpp"

namespace erd {

std::vector<int> choose_artificial_labels(std::size_t k, int num_classes,
                                          std::span<const int> explicit_labels,
                                          std::uint64_t seed) {
  if (k < 2) throw ArityError("an ERD ensemble needs K >= 2 members");
  if (k > static_cast<std::size_t>(std::max(num_classes, 0))) {
    throw LabelExhaustionError("K = " + std::to_string(k) + " exceeds the " +
                               std::to_string(num_classes) + " available labels");
  }
  if (!explicit_labels.empty()) {
    if (explicit_labels.size() != k) {
      throw ValidationError("expected " + std::to_string(k) + " explicit labels, got " +
                            std::to_string(explicit_labels.size()));
    }
    std::set<int> seen;
    for (int c : explicit_labels) {
      if (c < 0 || c >= num_classes) {
        throw ValidationError("artificial label " + std::to_string(c) + " outside [0, " +
                              std::to_string(num_classes) + ")");
      }
      if (!seen.insert(c).second) {
        throw ValidationError("duplicate artificial label " + std::to_string(c));
      }
    }
    return {explicit_labels.begin(), explicit_labels.end()};
  }
  std::vector<int> all(static_cast<std::size_t>(num_classes));
  std::iota(all.begin(), all.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(k);
  return all;
}

std::size_t select_stop_epoch(std::span<const ErdEpochRecord> trace) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].epoch < 1) continue;
    if (!best || trace[i].val_accuracy > trace[*best].val_accuracy) best = i;
  }
  if (!best) throw ValidationError("trace has no epoch >= 1");
  return *best;
}

namespace {

struct MemberResult {
  MlpClassifier model;
  std::size_t stop_epoch = 0;
  std::vector<ErdEpochRecord> trace;
};

ErdEpochRecord evaluate_member(const MlpClassifier& m, std::size_t epoch, const Dataset& s,
                               const Dataset& u, const Dataset& v, int c,
                               const std::vector<bool>& truth) {
  ErdEpochRecord r;
  r.epoch = epoch;
  r.val_accuracy = accuracy(m, v);
  r.acc_on_s = accuracy(m, s);
  if (u.empty()) return r;
  const auto pred = predict(m, u.features);
  std::size_t hit = 0;
  std::size_t hit_ood = 0;
  std::size_t hit_id = 0;
  std::size_t n_ood = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool is_c = pred[i] == c;
    hit += is_c ? 1 : 0;
    if (!truth.empty()) {
      if (truth[i]) {
        ++n_ood;
        hit_ood += is_c ? 1 : 0;
      } else {
        hit_id += is_c ? 1 : 0;
      }
    }
  }
  r.acc_on_u_with_label_c = static_cast<double>(hit) / static_cast<double>(pred.size());
  if (!truth.empty()) {
    const std::size_t n_id = pred.size() - n_ood;
    if (n_ood > 0) r.acc_u_c_on_ood = static_cast<double>(hit_ood) / static_cast<double>(n_ood);
    if (n_id > 0) r.acc_u_c_on_id = static_cast<double>(hit_id) / static_cast<double>(n_id);
  }
  return r;
}

MemberResult fit_member(const MlpClassifier& pretrained, const Dataset& s, const Dataset& u,
                        const Dataset& v, int c, const TrainConfig& config,
                        const std::vector<bool>& truth) {
  Dataset relabeled = u;
  std::fill(relabeled.labels.begin(), relabeled.labels.end(), c);
  Dataset combined = concat(s, relabeled);
  combined.num_classes = static_cast<int>(pretrained.num_classes());

  MemberResult result;
  result.trace.push_back(evaluate_member(pretrained, 0, s, u, v, c, truth));
  std::optional<MlpClassifier> best;
  double best_val = -1.0;
  auto on_epoch = [&](const EpochStats& stats, const MlpClassifier& model) {
    auto rec = evaluate_member(model, stats.epoch, s, u, v, c, truth);
    if (rec.val_accuracy > best_val) {
      best_val = rec.val_accuracy;
      best = model;
      result.stop_epoch = stats.epoch;
    }
    result.trace.push_back(rec);
  };
  sgd_train(pretrained, combined, config, on_epoch);
  result.model = std::move(*best);
  return result;
}

}  // namespace

ErdEnsemble erd_fit(const MlpClassifier& pretrained, const Dataset& s, const Dataset& u,
                    const Dataset& v, const ErdOptions& options,
                    const std::vector<bool>& unlabeled_truth) {
  pretrained.validate();
  options.train.validate();
  const int classes = static_cast<int>(pretrained.num_classes());
  auto labels =
      choose_artificial_labels(options.k, classes, options.labels, options.label_seed);
  if (s.empty()) throw ValidationError("labeled train set S is empty");
  if (v.empty()) throw ValidationError("validation set V is empty");
  if (s.dim() != pretrained.input_dim() || v.dim() != pretrained.input_dim() ||
      (!u.empty() && u.dim() != pretrained.input_dim())) {
    throw ShapeError("data dimension does not match the pretrained model");
  }
  for (int y : u.labels) {
    if (y != kUnlabeled) throw ValidationError("unlabeled set U must carry label -1 only");
  }
  if (!unlabeled_truth.empty() && unlabeled_truth.size() != u.size()) {
    throw ShapeError("unlabeled truth length != |U|");
  }

  std::vector<MemberResult> results(labels.size());
  auto run = [&](std::size_t i) {
    TrainConfig cfg = options.train;
    cfg.seed = derive_seed(options.train.seed, i);
    results[i] = fit_member(pretrained, s, u, v, labels[i], cfg, unlabeled_truth);
  };
  if (options.parallel && labels.size() > 1) {
    std::vector<std::exception_ptr> errors(labels.size());
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          run(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t i = 0; i < labels.size(); ++i) run(i);
  }

  ErdEnsemble out;
  out.artificial_labels = std::move(labels);
  for (auto& r : results) {
    out.members.push_back(std::move(r.model));
    out.stop_epochs.push_back(r.stop_epoch);
    out.traces.push_back(std::move(r.trace));
  }
  return out;
}

std::vector<double> ensemble_scores(std::span<const MlpClassifier> members, const Matrix& x,
                                    Statistic statistic) {
  if (members.empty()) throw ArityError("ensemble has no members");
  std::vector<Matrix> probs;
  probs.reserve(members.size());
  for (const auto& m : members) probs.push_back(forward_batch(m, x));
  std::vector<double> scores(x.rows());
  std::vector<std::vector<double>> outputs(members.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t k = 0; k < members.size(); ++k) {
      auto r = probs[k].row(i);
      outputs[k].assign(r.begin(), r.end());
    }
    scores[i] = compute_statistic(statistic, outputs);
  }
  return scores;
}

DetectionResult detect(const ErdEnsemble& ensemble, const Dataset& test, double threshold,
                       Statistic statistic) {
  if (ensemble.members.empty()) throw ArityError("ensemble has no members");
  DetectionResult out;
  out.threshold = threshold;
  out.scores = ensemble_scores(ensemble.members, test.features, statistic);
  out.flagged.resize(out.scores.size());
  for (std::size_t i = 0; i < out.scores.size(); ++i) out.flagged[i] = out.scores[i] > threshold;
  return out;
}

GridEvaluation grid_eval(std::span<const MlpClassifier> models, const GridBox& box,
                         std::size_t nx, std::size_t ny) {
  if (models.empty()) throw ArityError("grid_eval needs at least one model");
  for (const auto& m : models) {
    if (m.input_dim() != 2) throw ShapeError("grid_eval needs 2D models");
  }
  if (nx == 0 || ny == 0) throw ValidationError("grid resolution must be positive");
  GridEvaluation g;
  g.nx = nx;
  g.ny = ny;
  Matrix pts(nx * ny, 2);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t r = iy * nx + ix;
      pts(r, 0) = box.x_min + (static_cast<double>(ix) + 0.5) * (box.x_max - box.x_min) /
                                  static_cast<double>(nx);
      pts(r, 1) = box.y_min + (static_cast<double>(iy) + 0.5) * (box.y_max - box.y_min) /
                                  static_cast<double>(ny);
      g.x.push_back(pts(r, 0));
      g.y.push_back(pts(r, 1));
    }
  }
  g.member_argmax.assign(pts.rows(), std::vector<int>(models.size()));
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto pred = predict(models[k], pts);
    for (std::size_t i = 0; i < pred.size(); ++i) g.member_argmax[i][k] = pred[i];
  }
  if (models.size() >= 2) {
    g.tdis = ensemble_scores(models, pts, Statistic::tdis_tv);
  } else {
    g.tdis.assign(pts.rows(), 0.0);
  }
  return g;
}

void write_grid_csv(const GridEvaluation& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  const std::size_t k = grid.member_argmax.empty() ? 0 : grid.member_argmax.front().size();
  out << "x,y";
  for (std::size_t m = 0; m < k; ++m) out << ",m" << m;
  out << ",tdis\n";
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    out << format_double(grid.x[i]) << ',' << format_double(grid.y[i]);
    for (int a : grid.member_argmax[i]) out << ',' << a;
    out << ',' << format_double(grid.tdis[i]) << '\n';
  }
}

void write_learning_curve_csv(std::span<const ErdEpochRecord> trace,
                              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "epoch,val_acc,acc_S,acc_U_c_on_ood,acc_U_c_on_id\n";
  for (const auto& r : trace) {
    out << r.epoch << ',' << format_double(r.val_accuracy) << ',' << format_double(r.acc_on_s)
        << ',' << (r.acc_u_c_on_ood ? format_double(*r.acc_u_c_on_ood) : "") << ','
        << (r.acc_u_c_on_id ? format_double(*r.acc_u_c_on_id) : "") << '\n';
  }
}

void save_ensemble(const ErdEnsemble& ensemble, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["kind"] = "erd";
  manifest["artificial_labels"] = ensemble.artificial_labels;
  manifest["stop_epochs"] = ensemble.stop_epochs;
  manifest["statistic_defaults"] = {{"statistic", to_string(Statistic::tdis_tv)},
                                    {"target_fpr", 0.05}};
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
    const std::string name = "member_" + std::to_string(i) + ".json";
    save_model(ensemble.members[i], dir / name);
    files.push_back(name);
  }
  manifest["members"] = files;
  write_json(manifest, dir / "manifest.json");
}

ErdEnsemble load_ensemble(const std::filesystem::path& dir) {
  const auto manifest = read_json(dir / "manifest.json");
  if (manifest.value("kind", "") != "erd") throw ValidationError("not an ERD ensemble: " + dir.string());
  ErdEnsemble e;
  try {
    e.artificial_labels = manifest.at("artificial_labels").get<std::vector<int>>();
    e.stop_epochs = manifest.at("stop_epochs").get<std::vector<std::size_t>>();
    for (const auto& name : manifest.at("members")) {
      e.members.push_back(load_model(dir / name.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("malformed ensemble manifest: ") + ex.what());
  }
  if (e.members.empty()) throw ArityError("ensemble manifest lists no members");
  return e;
}

}  // namespace erd
