#include "fedmix/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fedmix/errors.hpp"
#include "fedmix/rng.hpp"

namespace fedmix {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string format_double_shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ';';
    s += std::to_string(v[i]);
  }
  return s;
}

double pooled_stddev(const Matrix& m) {
  if (m.data().empty()) return 0.0;
  double mean = 0.0;
  for (double v : m.data()) mean += v;
  mean /= static_cast<double>(m.data().size());
  double var = 0.0;
  for (double v : m.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m.data().size());
  return std::sqrt(var);
}

}  // namespace

AugmentPlan resolve_augments(const ExperimentConfig& cfg, const Dataset& unlabeled) {
  std::string family = cfg.augment_family;
  if (family == "auto") family = cfg.dataset_kind == "cifar10" ? "image" : "jitter";

  AugmentPlan plan;
  if (family == "jitter") {
    AugmentSpec jitter;
    jitter.kind = AugmentKind::jitter;
    jitter.jitter_stddev = cfg.jitter_scale * pooled_stddev(unlabeled.inputs);
    plan.family.members = {jitter};
    plan.view1 = jitter;
    plan.view2 = jitter;
  } else if (family == "image") {
    if (cfg.dataset_kind != "cifar10") {
      throw ConfigError("augment.family=image needs image data (cifar10)");
    }
    const ImageShape shape{32, 32, 3};
    AugmentSpec flip;
    flip.kind = AugmentKind::flip;
    flip.shape = shape;
    AugmentSpec shift;
    shift.kind = AugmentKind::shift;
    shift.shape = shape;
    shift.shift_fraction = cfg.shift_fraction;
    plan.family.members = {flip, shift};
    plan.view1 = shift;
    plan.view2 = shift;
  } else if (family == "identity") {
    AugmentSpec id;
    plan.family.members = {id};
    plan.view1 = id;
    plan.view2 = id;
  } else {
    throw ConfigError("unknown augment family '" + family + "'");
  }
  return plan;
}

void build_run(const ExperimentConfig& cfg, std::uint64_t seed, RunSetup& out) {
  cfg.validate();

  Dataset pool;
  if (cfg.dataset_kind == "synthetic") {
    pool = make_synthetic(cfg.classes, cfg.per_class, cfg.input_dim, cfg.spread,
                          derive_seed(seed, stream_tag("data")));
  } else {
    pool = load_cifar10(cfg.data_path);
  }

  auto [test, rest] = split_labeled(pool, cfg.n_test, derive_seed(seed, stream_tag("test-split")));
  out.test = std::move(test);
  auto [labeled, unlabeled] =
      split_labeled(rest, cfg.n_labeled, derive_seed(seed, stream_tag("label-split")));
  out.labeled = std::move(labeled);
  out.unlabeled = std::move(unlabeled);

  DirichletConfig dir;
  dir.mu = cfg.mu;
  dir.client_count = cfg.fed.client_count;
  dir.seed = derive_seed(seed, stream_tag("partition"));
  dir.quantity_imbalance = cfg.quantity_imbalance;
  out.plan = dirichlet_partition(out.unlabeled, dir);
  out.clients = build_clients(out.unlabeled, out.plan);

  const ModelParams model = init_model(out.unlabeled.input_dim(), cfg.hidden,
                                       out.unlabeled.class_count,
                                       derive_seed(seed, stream_tag("model")));
  out.server.omega = model;
  out.server.sigma = model;
  out.server.labeled = out.labeled;
  out.server.round = 0;

  const AugmentPlan aug = resolve_augments(cfg, out.unlabeled);
  out.ctx.fed = cfg.fed;
  out.ctx.loss = cfg.loss;
  out.ctx.pseudo = cfg.pseudo;
  out.ctx.family = aug.family;
  out.ctx.consistency = cfg.consistency == "kl" ? ConsistencyKind::kl : ConsistencyKind::l2;
  out.ctx.view1 = aug.view1;
  out.ctx.view2 = aug.view2;
  out.ctx.seed = derive_seed(seed, stream_tag("training"));
  out.ctx.test = &out.test;
}

std::string metrics_csv_header() {
  return "round,acc_global,acc_supervised,acc_unsup_global,loss_supervised,"
         "loss_unsupervised,loss_pseudo_ce,loss_consistency,loss_proximal,"
         "acceptance,precision,labeler_accuracy,selected,dropped,q_snapshot";
}

std::string metrics_csv_row(const RoundMetrics& m) {
  std::string s = std::to_string(m.round);
  for (double v : {m.acc_global, m.acc_supervised, m.acc_unsup_global, m.loss_supervised,
                   m.loss_unsupervised, m.loss_pseudo_ce, m.loss_consistency, m.loss_proximal,
                   m.acceptance, m.precision, m.labeler_accuracy}) {
    s += ',';
    s += format_double_shortest(v);
  }
  s += ',' + join_ints(m.selected);
  s += ',' + join_ints(m.dropped);
  s += ',' + join_ints(m.q_snapshot);
  return s;
}

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed,
                     const fs::path& run_dir) {
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) throw IoError("cannot create " + run_dir.string() + ": " + ec.message());

  ExperimentConfig snapshot = cfg;
  snapshot.seeds = {seed};
  write_file(run_dir / "config.ini", serialize_config(snapshot));

  RunSetup setup;
  build_run(cfg, seed, setup);

  RunResult result;
  result.seed = seed;
  result.dir = run_dir;

  std::string csv = metrics_csv_header() + "\n";
  for (int t = 0; t < cfg.fed.rounds; ++t) {
    RoundMetrics m = run_round(setup.server, setup.clients, setup.ctx);
    csv += metrics_csv_row(m) + "\n";
    result.rounds.push_back(std::move(m));
  }
  write_file(run_dir / "metrics.csv", csv);

  const RoundMetrics& last = result.rounds.back();
  result.final_accuracy = last.acc_global;
  result.best_accuracy = last.acc_global;
  result.best_round = last.round;
  for (const auto& m : result.rounds) {
    if (m.acc_global > result.best_accuracy) {
      result.best_accuracy = m.acc_global;
      result.best_round = m.round;
    }
  }

  ordered_json j;
  j["schema_version"] = 1;
  j["name"] = cfg.name;
  j["seed"] = seed;
  j["aggregator"] = aggregator_name(cfg.fed.aggregator);
  j["rounds"] = cfg.fed.rounds;
  j["final"] = {{"acc_global", last.acc_global},
                {"acc_supervised", last.acc_supervised},
                {"acc_unsup_global", last.acc_unsup_global},
                {"loss_supervised", last.loss_supervised},
                {"loss_unsupervised", last.loss_unsupervised},
                {"acceptance", last.acceptance},
                {"precision", last.precision}};
  j["best"] = {{"round", result.best_round}, {"acc_global", result.best_accuracy}};
  write_file(run_dir / "summary.json", j.dump(2) + "\n");
  return result;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  const fs::path base = out_dir / cfg.name;
  std::vector<RunResult> results;
  for (std::uint64_t seed : cfg.seeds) {
    results.push_back(run_single(cfg, seed, base / ("seed" + std::to_string(seed))));
  }

  ordered_json j;
  j["schema_version"] = 1;
  j["name"] = cfg.name;
  j["aggregator"] = aggregator_name(cfg.fed.aggregator);
  ordered_json per_seed = ordered_json::array();
  double sum_final = 0.0;
  for (const auto& r : results) {
    per_seed.push_back({{"seed", r.seed},
                        {"final_acc", r.final_accuracy},
                        {"best_acc", r.best_accuracy},
                        {"best_round", r.best_round}});
    sum_final += r.final_accuracy;
  }
  j["runs"] = per_seed;
  j["mean_final_acc"] = sum_final / static_cast<double>(results.size());
  write_file(base / "experiment.json", j.dump(2) + "\n");
  return results;
}

void run_grid(const ExperimentConfig& cfg, const std::string& dotted_key,
              const std::vector<std::string>& values, const fs::path& out_dir) {
  if (values.empty()) throw ContractError("run_grid: no values given");
  const fs::path base = out_dir / cfg.name;
  ordered_json cells = ordered_json::array();
  for (const std::string& v : values) {
    ExperimentConfig cell_cfg = cfg;
    apply_override(cell_cfg, dotted_key, v);
    cell_cfg.name = dotted_key + "=" + v;
    const auto results = run_experiment(cell_cfg, base);
    double sum = 0.0;
    for (const auto& r : results) sum += r.final_accuracy;
    cells.push_back({{"value", v},
                     {"mean_final_acc", sum / static_cast<double>(results.size())}});
  }
  ordered_json j;
  j["schema_version"] = 1;
  j["key"] = dotted_key;
  j["cells"] = cells;
  write_file(base / "grid.json", j.dump(2) + "\n");
}

void run_comparison(const ExperimentConfig& cfg, const fs::path& out_dir) {
  static const Aggregator kAll[] = {
      Aggregator::fedmix_fedfreq,
      Aggregator::fedmix_fedavg_weights,
      Aggregator::naive_decomposition,
      Aggregator::fedavg_supervised_only,
  };
  const fs::path base = out_dir / cfg.name;
  ordered_json rows = ordered_json::array();
  std::string table =
      "aggregator                mean_final   min_final   max_final   mean_best\n";
  for (Aggregator a : kAll) {
    ExperimentConfig sub = cfg;
    sub.fed.aggregator = a;
    sub.name = aggregator_name(a);
    const auto results = run_experiment(sub, base);
    double sum = 0.0, best_sum = 0.0;
    double mn = results.front().final_accuracy, mx = results.front().final_accuracy;
    for (const auto& r : results) {
      sum += r.final_accuracy;
      best_sum += r.best_accuracy;
      mn = std::min(mn, r.final_accuracy);
      mx = std::max(mx, r.final_accuracy);
    }
    const double mean = sum / static_cast<double>(results.size());
    const double mean_best = best_sum / static_cast<double>(results.size());
    rows.push_back({{"aggregator", aggregator_name(a)},
                    {"mean_final_acc", mean},
                    {"min_final_acc", mn},
                    {"max_final_acc", mx},
                    {"mean_best_acc", mean_best}});
    char line[160];
    std::snprintf(line, sizeof line, "%-24s %11.4f %11.4f %11.4f %11.4f\n",
                  aggregator_name(a).c_str(), mean, mn, mx, mean_best);
    table += line;
  }
  ordered_json j;
  j["schema_version"] = 1;
  j["rows"] = rows;
  write_file(base / "comparison.json", j.dump(2) + "\n");
  write_file(base / "comparison.txt", table);
}

void export_curves(const fs::path& root, const fs::path& out_csv) {
  if (!fs::exists(root)) throw IoError("export: no such directory " + root.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "metrics.csv") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw IoError("export: no metrics.csv found under " + root.string());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });

  static const char* kSkip[] = {"round", "selected", "dropped", "q_snapshot"};
  std::string out = "run,round,metric,value\n";
  for (const fs::path& file : files) {
    std::ifstream in(file);
    if (!in) throw IoError("export: cannot read " + file.string());
    std::string header;
    if (!std::getline(in, header)) {
      throw FormatError("export: empty metrics file " + file.string());
    }
    std::vector<std::string> cols;
    {
      std::stringstream ss(header);
      std::string c;
      while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    int round_col = -1;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == "round") round_col = static_cast<int>(i);
    }
    if (round_col < 0) {
      throw FormatError("export: " + file.string() + " has no round column");
    }
    const std::string run_name =
        fs::relative(file.parent_path(), root).generic_string();
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<std::string> vals;
      std::stringstream ss(line);
      std::string v;
      while (std::getline(ss, v, ',')) vals.push_back(v);
      while (vals.size() < cols.size()) vals.emplace_back();  // trailing empties
      if (vals.size() != cols.size()) {
        throw FormatError("export: " + file.string() + " line " + std::to_string(lineno) +
                          " has " + std::to_string(vals.size()) + " fields, expected " +
                          std::to_string(cols.size()));
      }
      for (std::size_t i = 0; i < cols.size(); ++i) {
        bool skip = false;
        for (const char* s : kSkip) skip = skip || cols[i] == s;
        if (skip) continue;
        out += run_name + ',' + vals[static_cast<std::size_t>(round_col)] + ',' + cols[i] +
               ',' + vals[i] + '\n';
      }
    }
  }
  if (out_csv.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(out_csv.parent_path(), ec);
  }
  write_file(out_csv, out);
}

}  // namespace fedmix
