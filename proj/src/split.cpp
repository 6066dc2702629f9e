#include "erd/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "erd/checkpoint.hpp"
#include "erd/error.hpp"

namespace erd {

namespace {

std::size_t rounded(double x) { return static_cast<std::size_t>(std::llround(x)); }

std::vector<std::size_t> take(std::vector<std::size_t>& from, std::size_t& cursor, std::size_t n) {
  std::vector<std::size_t> out(from.begin() + static_cast<std::ptrdiff_t>(cursor),
                               from.begin() + static_cast<std::ptrdiff_t>(cursor + n));
  cursor += n;
  return out;
}

// Builds a mixture dataset, shuffled so ID and OOD rows interleave.
void build_mixture(const Dataset& pool, std::vector<std::size_t> id, std::vector<std::size_t> ood,
                   bool keep_id_labels, int num_classes, std::mt19937_64& rng, Dataset& out,
                   std::vector<bool>& truth, std::vector<std::size_t>& index) {
  std::vector<std::pair<std::size_t, bool>> rows;
  for (std::size_t i : id) rows.emplace_back(i, false);
  for (std::size_t i : ood) rows.emplace_back(i, true);
  std::shuffle(rows.begin(), rows.end(), rng);
  index.clear();
  truth.clear();
  for (const auto& [i, is_ood] : rows) {
    index.push_back(i);
    truth.push_back(is_ood);
  }
  out = pool.subset(index);
  out.num_classes = num_classes;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (truth[r] || !keep_id_labels) out.labels[r] = kUnlabeled;
  }
}

}  // namespace

SplitBundle make_ssnd_split(const Dataset& pool, std::span<const int> groups,
                            const std::vector<bool>& ood_group_flags, SplitFractions fractions,
                            double ood_ratio, std::size_t unlabeled_size, std::uint64_t seed) {
  if (groups.size() != pool.size()) throw ShapeError("groups length != pool size");
  if (!(ood_ratio >= 0.0 && ood_ratio <= 1.0)) throw ValidationError("ood_ratio must lie in [0, 1]");
  if (!(fractions.train > 0.0) || !(fractions.val > 0.0) || fractions.test < 0.0) {
    throw ValidationError("split fractions: train and val must be > 0, test >= 0");
  }
  const double frac_sum = fractions.train + fractions.val + fractions.test;
  if (frac_sum > 1.0 + 1e-12) {
    throw SizeError("split fractions sum to " + std::to_string(frac_sum) + " > 1");
  }

  std::vector<std::size_t> id;
  std::vector<std::size_t> ood;
  int max_id_label = -1;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const int g = groups[i];
    if (g < 0 || static_cast<std::size_t>(g) >= ood_group_flags.size()) {
      throw ValidationError("row " + std::to_string(i) + " has unknown group " + std::to_string(g));
    }
    if (ood_group_flags[static_cast<std::size_t>(g)]) {
      ood.push_back(i);
    } else {
      if (pool.labels[i] < 0) throw ValidationError("ID rows need labels");
      id.push_back(i);
      max_id_label = std::max(max_id_label, pool.labels[i]);
    }
  }
  const int num_classes = max_id_label + 1;

  const std::size_t n_id = id.size();
  const std::size_t n_train = rounded(fractions.train * static_cast<double>(n_id));
  const std::size_t n_val = rounded(fractions.val * static_cast<double>(n_id));
  const std::size_t n_test_id = rounded(fractions.test * static_cast<double>(n_id));
  const std::size_t n_u_ood = rounded(ood_ratio * static_cast<double>(unlabeled_size));
  const std::size_t n_u_id = unlabeled_size - n_u_ood;
  const std::size_t n_test_ood = n_test_id;

  const std::size_t need_id = n_train + n_val + n_test_id + n_u_id;
  if (need_id > n_id) {
    throw SizeError("need " + std::to_string(need_id) + " ID samples (train " +
                    std::to_string(n_train) + ", val " + std::to_string(n_val) + ", test " +
                    std::to_string(n_test_id) + ", unlabeled " + std::to_string(n_u_id) +
                    ") but only " + std::to_string(n_id) + " exist; short by " +
                    std::to_string(need_id - n_id));
  }
  const std::size_t need_ood = n_u_ood + n_test_ood;
  if (need_ood > ood.size()) {
    throw SizeError("need " + std::to_string(need_ood) + " OOD samples but only " +
                    std::to_string(ood.size()) + " exist; short by " +
                    std::to_string(need_ood - ood.size()));
  }
  if (n_train == 0 || n_val == 0) throw SizeError("train and validation splits must be non-empty");

  std::mt19937_64 rng(seed);
  std::shuffle(id.begin(), id.end(), rng);
  std::shuffle(ood.begin(), ood.end(), rng);

  SplitBundle out;
  std::size_t id_cursor = 0;
  std::size_t ood_cursor = 0;
  out.train_index = take(id, id_cursor, n_train);
  out.val_index = take(id, id_cursor, n_val);
  auto u_id = take(id, id_cursor, n_u_id);
  auto t_id = take(id, id_cursor, n_test_id);
  auto u_ood = take(ood, ood_cursor, n_u_ood);
  auto t_ood = take(ood, ood_cursor, n_test_ood);

  out.train = pool.subset(out.train_index);
  out.train.num_classes = num_classes;
  out.validation = pool.subset(out.val_index);
  out.validation.num_classes = num_classes;
  build_mixture(pool, std::move(u_id), std::move(u_ood), false, num_classes, rng, out.unlabeled,
                out.unlabeled_truth, out.unlabeled_index);
  build_mixture(pool, std::move(t_id), std::move(t_ood), true, num_classes, rng, out.test,
                out.test_truth, out.test_index);
  return out;
}

SplitBundle make_ssnd_split(const ClusterableBundle& bundle, const ClusterableSpec& spec,
                            SplitFractions fractions, double ood_ratio,
                            std::size_t unlabeled_size, std::uint64_t seed) {
  Dataset truth_labeled = bundle.points;
  for (std::size_t i = 0; i < truth_labeled.size(); ++i) {
    truth_labeled.labels[i] =
        spec.cluster_labels[static_cast<std::size_t>(bundle.cluster_assignment[i])];
  }
  std::vector<bool> flags = spec.ood_cluster_flags;
  if (flags.empty()) flags.assign(spec.num_clusters(), false);
  return make_ssnd_split(truth_labeled, bundle.cluster_assignment, flags, fractions, ood_ratio,
                         unlabeled_size, seed);
}

void write_truth_csv(const std::vector<bool>& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "is_ood\n";
  for (bool t : truth) out << (t ? 1 : 0) << '\n';
}

std::vector<bool> read_truth_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ValidationError("missing truth file " + path.string());
  }
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("is_ood", 0) != 0) {
    throw ParseError(path.string() + ": expected header is_ood", 1);
  }
  std::vector<bool> truth;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "0") {
      truth.push_back(false);
    } else if (line == "1") {
      truth.push_back(true);
    } else {
      throw ParseError(path.string() + ": expected 0 or 1", line_no);
    }
  }
  return truth;
}

void save_split(const SplitBundle& split, const std::filesystem::path& dir,
                const nlohmann::json& meta) {
  std::filesystem::create_directories(dir);
  write_csv(split.train, dir / "train.csv");
  write_csv(split.validation, dir / "val.csv");
  write_csv(split.unlabeled, dir / "unlabeled.csv");
  write_truth_csv(split.unlabeled_truth, dir / "unlabeled_truth.csv");
  write_csv(split.test, dir / "test.csv");
  write_truth_csv(split.test_truth, dir / "test_truth.csv");
  nlohmann::json m = meta;
  m["num_classes"] = split.num_classes();
  m["dim"] = split.dim();
  m["sizes"] = {{"train", split.train.size()},
                {"val", split.validation.size()},
                {"unlabeled", split.unlabeled.size()},
                {"test", split.test.size()}};
  write_json(m, dir / "meta.json");
}

SplitBundle load_split(const std::filesystem::path& dir) {
  const auto meta = read_json(dir / "meta.json");
  const int classes = meta.at("num_classes").get<int>();
  SplitBundle s;
  s.train = read_csv(dir / "train.csv", classes);
  s.validation = read_csv(dir / "val.csv", classes);
  s.unlabeled = read_csv(dir / "unlabeled.csv", classes, true);
  s.unlabeled_truth = read_truth_csv(dir / "unlabeled_truth.csv");
  s.test = read_csv(dir / "test.csv", classes, true);
  s.test_truth = read_truth_csv(dir / "test_truth.csv");
  for (const Dataset* d : {&s.train, &s.validation, &s.unlabeled, &s.test}) {
    if (d->num_classes != classes) throw ValidationError("split labels exceed meta num_classes");
  }
  if (s.unlabeled_truth.size() != s.unlabeled.size() || s.test_truth.size() != s.test.size()) {
    throw ShapeError("truth file length does not match its split");
  }
  return s;
}

}  // namespace erd
