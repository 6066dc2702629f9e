// erd_cli: JSON-config driven experiment runner.
//
//   erd_cli <gen|pretrain|erd|baseline|eval|sweep|propcheck> --config cfg.json --out dir
//
// Exit status: 0 ok, 1 invalid input, 2 numeric failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "erd/baselines.hpp"
#include "erd/checkpoint.hpp"
#include "erd/dataset.hpp"
#include "erd/ensemble.hpp"
#include "erd/error.hpp"
#include "erd/experiment.hpp"
#include "erd/metrics.hpp"
#include "erd/split.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace erd;

namespace {

struct Args {
  fs::path config;
  fs::path out;
};

json value_or_null(const json& j, const char* key) {
  return j.contains(key) ? j.at(key) : json();
}

// A command's data comes from a saved split directory or from an inline recipe.
SplitBundle split_from(const json& cfg) {
  if (cfg.contains("split_dir")) return load_split(cfg.at("split_dir").get<std::string>());
  if (cfg.contains("data")) return exp::build_data(cfg.at("data")).split;
  throw ValidationError("config needs either \"split_dir\" or \"data\"");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

int cmd_gen(const json& cfg, const fs::path& out) {
  auto built = exp::build_data(cfg.contains("data") ? cfg.at("data") : cfg);
  json meta = {{"recipe", built.recipe}};
  if (built.pool && built.spec) {
    const auto report = check_clusterable(*built.pool, *built.spec);
    meta["clusterable"] = report.ok();
    meta["clusterability_violations"] = report.violations;
  }
  save_split(built.split, out, meta);
  std::printf("wrote split to %s (train %zu, val %zu, unlabeled %zu, test %zu)\n",
              out.string().c_str(), built.split.train.size(), built.split.validation.size(),
              built.split.unlabeled.size(), built.split.test.size());
  return 0;
}

int cmd_pretrain(const json& cfg, const fs::path& out) {
  const auto split = split_from(cfg);
  const auto pc = exp::pretrain_config_from_json(value_or_null(cfg, "pretrain"));
  const auto result = exp::pretrain(split, pc);
  save_model(result.model, out / "model.json");
  std::string log = "epoch,loss,train_acc,val_acc\n";
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const auto& e = result.trace[i];
    log += std::to_string(e.epoch) + "," + format_double(e.loss) + "," +
           format_double(e.accuracy) + "," + format_double(result.val_trace[i]) + "\n";
  }
  write_text(out / "train_log.csv", log);
  write_json({{"best_epoch", result.best_epoch}, {"val_accuracy", result.val_accuracy}},
             out / "summary.json");
  std::printf("val_accuracy %.6f (epoch %zu)\n", result.val_accuracy, result.best_epoch);
  return 0;
}

int cmd_erd(const json& cfg, const fs::path& out) {
  const auto split = split_from(cfg);
  MlpClassifier pretrained;
  if (cfg.contains("pretrained")) {
    pretrained = load_model(cfg.at("pretrained").get<std::string>());
  } else {
    pretrained = exp::pretrain(split, exp::pretrain_config_from_json(value_or_null(cfg, "pretrain")))
                     .model;
  }
  auto options = exp::erd_options_from_json(value_or_null(cfg, "erd"));
  if (!value_or_null(cfg, "erd").contains("k") && options.labels.empty()) {
    options.k = std::min(options.k, pretrained.num_classes());
  }
  const auto ensemble =
      erd_fit(pretrained, split.train, split.unlabeled, split.validation, options,
              split.unlabeled_truth);
  save_ensemble(ensemble, out);
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    write_learning_curve_csv(ensemble.traces[i],
                             out / ("learning_curve_" + std::to_string(i) + ".csv"));
  }
  if (cfg.contains("grid")) {
    const auto& g = cfg.at("grid");
    const GridBox box{g.at("x_min").get<double>(), g.at("x_max").get<double>(),
                      g.at("y_min").get<double>(), g.at("y_max").get<double>()};
    const auto grid = grid_eval(ensemble.members, box, g.value("nx", std::size_t{100}),
                                g.value("ny", std::size_t{100}));
    write_grid_csv(grid, out / "grid.csv");
  }
  std::printf("erd ensemble of %zu members, labels", ensemble.size());
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    std::printf(" %d@%zu", ensemble.artificial_labels[i], ensemble.stop_epochs[i]);
  }
  std::printf("\n");
  return 0;
}

int cmd_baseline(const json& cfg, const fs::path& out) {
  const auto split = split_from(cfg);
  const std::string kind = cfg.value("kind", std::string("vanilla"));
  if (kind == "vanilla") {
    const auto e = vanilla_fit(split.train, split.validation,
                               exp::vanilla_options_from_json(value_or_null(cfg, "vanilla")));
    save_vanilla(e, out);
    std::printf("vanilla ensemble of %zu members\n", e.members.size());
    return 0;
  }
  if (kind == "binary") {
    const auto b = binary_fit(split.train, split.unlabeled, split.validation,
                              exp::binary_options_from_json(value_or_null(cfg, "binary")));
    save_binary(b, out);
    std::printf("binary discriminator, stop epoch %zu\n", b.stop_epoch);
    return 0;
  }
  throw ValidationError("unknown baseline kind '" + kind + "' (expected vanilla|binary)");
}

int cmd_eval(const json& cfg, const fs::path& out) {
  const auto split = split_from(cfg);
  if (split.test_truth.size() != split.test.size()) {
    throw ValidationError("test truth does not cover the test set");
  }
  const std::string scorer = cfg.at("scorer").get<std::string>();
  const fs::path model_dir = cfg.at("model_dir").get<std::string>();
  const double target_fpr = cfg.value("target_fpr", 0.05);
  std::vector<double> val;
  std::vector<double> test;
  if (scorer == "erd_tdis" || scorer == "erd_entropy") {
    const auto e = load_ensemble(model_dir);
    const auto stat = scorer == "erd_tdis" ? Statistic::tdis_tv : Statistic::entropy_avg;
    val = ensemble_scores(e.members, split.validation.features, stat);
    test = ensemble_scores(e.members, split.test.features, stat);
  } else if (scorer == "vanilla") {
    const auto e = load_vanilla(model_dir);
    val = ensemble_scores(e.members, split.validation.features, Statistic::entropy_avg);
    test = ensemble_scores(e.members, split.test.features, Statistic::entropy_avg);
  } else if (scorer == "binary") {
    const auto b = load_binary(model_dir);
    val = binary_scores(b, split.validation.features);
    test = binary_scores(b, split.test.features);
  } else {
    throw ValidationError("unknown scorer '" + scorer +
                          "' (expected erd_tdis|erd_entropy|vanilla|binary)");
  }
  const auto outcome = exp::evaluate_scores(val, test, split.test_truth, target_fpr);
  write_roc_csv(outcome.roc, out / "roc.csv");
  json summary = exp::to_json(outcome);
  summary["scorer"] = scorer;
  write_json(summary, out / "summary.json");
  std::printf("auroc %.6f tnr@95 %.6f\n", outcome.roc.auroc, outcome.roc.tnr_at_tpr95);
  return 0;
}

int cmd_sweep(const json& cfg, const fs::path& out) {
  const auto sc = exp::sweep_config_from_json(cfg);
  const auto rows = exp::run_sweep(sc);
  std::string csv = exp::to_string(sc.axis) + ",auroc,tnr95\n";
  for (const auto& r : rows) {
    csv += format_double(r.value) + "," + format_double(r.auroc) + "," +
           format_double(r.tnr_at_tpr95) + "\n";
    std::printf("%s=%g auroc %.6f tnr@95 %.6f\n", exp::to_string(sc.axis).c_str(), r.value,
                r.auroc, r.tnr_at_tpr95);
  }
  write_text(out / "sweep.csv", csv);
  return 0;
}

int cmd_propcheck(const json& cfg, const fs::path& out) {
  const auto pc = exp::propcheck_config_from_json(cfg);
  const auto report = exp::run_propcheck(pc);
  write_json(exp::to_json(report), out / "report.json");
  std::printf("success rate %.3f over %zu seeds: %s\n", report.success_rate, report.seeds.size(),
              report.passed ? "PASS" : "FAIL");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disagreement-based novelty detection experiments"};
  app.require_subcommand(1);
  Args args;
  const char* names[] = {"gen", "pretrain", "erd", "baseline", "eval", "sweep", "propcheck"};
  for (const char* name : names) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", args.config, "JSON config")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", args.out, "output directory")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const json cfg = read_json(args.config);
    fs::create_directories(args.out);
    write_json(cfg, args.out / "config.json");
    if (command == "gen") return cmd_gen(cfg, args.out);
    if (command == "pretrain") return cmd_pretrain(cfg, args.out);
    if (command == "erd") return cmd_erd(cfg, args.out);
    if (command == "baseline") return cmd_baseline(cfg, args.out);
    if (command == "eval") return cmd_eval(cfg, args.out);
    if (command == "sweep") return cmd_sweep(cfg, args.out);
    return cmd_propcheck(cfg, args.out);
  } catch (const NumericError& e) {
    std::cerr << "erd_cli " << command << ": numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "erd_cli " << command << ": " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "erd_cli " << command << ": bad config: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "erd_cli " << command << ": " << e.what() << "\n";
    return 1;
  }
}
