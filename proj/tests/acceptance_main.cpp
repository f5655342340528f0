// Acceptance gate: ten end-to-end checks, one PASS/FAIL line each, nonzero
// exit if anything fails. Runs standalone (no gtest) so the output reads as a
// checklist.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fedmix/config.hpp"
#include "fedmix/dataset.hpp"
#include "fedmix/errors.hpp"
#include "fedmix/evaluation.hpp"
#include "fedmix/federation.hpp"
#include "fedmix/harness.hpp"
#include "fedmix/loss.hpp"
#include "fedmix/nn.hpp"
#include "fedmix/partition.hpp"
#include "fedmix/rng.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using namespace fedmix;
using Clock = std::chrono::steady_clock;

namespace {

struct Gate {
  int failures = 0;

  // body fills `why` on failure and returns pass/fail; exceptions fail too.
  void check(int idx, const char* label, double budget_sec,
             const std::function<bool(std::string&)>& body) {
    const auto t0 = Clock::now();
    std::string why;
    bool ok = false;
    try {
      ok = body(why);
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
    if (ok && budget_sec > 0.0 && sec >= budget_sec) {
      ok = false;
      why = "over time budget of " + std::to_string(budget_sec) + "s";
    }
    std::printf("%s  %2d  %-58s %7.2fs%s%s\n", ok ? "PASS" : "FAIL", idx, label, sec,
                why.empty() ? "" : "  -- ", why.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- criterion 1: frequency-weight algebra ---------------------------------

bool check_fedfreq_algebra(std::string& why) {
  Rng rng = make_rng(derive_seed(11, stream_tag("accept-fedfreq")));
  for (int trial = 0; trial < 1000; ++trial) {
    const int s = 2 + static_cast<int>(uniform_index(rng, 19));  // 2..20
    std::vector<int> q(s);
    for (int& v : q) v = 1 + static_cast<int>(uniform_index(rng, 50));
    const FreqWeights fw = fedfreq_weights(q);
    double sum = 0.0;
    for (double w : fw.w) {
      if (!(w >= 0.0)) {
        why = "negative weight " + fmt(w) + " at trial " + std::to_string(trial);
        return false;
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      why = "weight sum off by " + fmt(sum - 1.0) + " at trial " + std::to_string(trial);
      return false;
    }
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) {
        const bool anti = (q[i] < q[j]) ? fw.w[i] > fw.w[j]
                          : (q[i] > q[j]) ? fw.w[i] < fw.w[j]
                                          : fw.w[i] == fw.w[j];
        if (!anti) {
          why = "not anti-monotone: q=(" + std::to_string(q[i]) + "," + std::to_string(q[j]) +
                ") w=(" + fmt(fw.w[i]) + "," + fmt(fw.w[j]) + ")";
          return false;
        }
      }
    }
  }
  return true;
}

// ---- criterion 2: analytic vs numeric gradients -----------------------------

bool check_gradient_suite(std::string& why) {
  constexpr double kTol = 1e-4;
  double worst = 0.0;
  std::string worst_site;
  const auto record = [&](const char* site, int trial, double rel) {
    if (rel > worst) {
      worst = rel;
      worst_site = std::string(site) + " (model " + std::to_string(trial) + ")";
    }
  };

  for (int trial = 0; trial < 20; ++trial) {
    const std::uint64_t seed = derive_seed(400 + trial, stream_tag("accept-grad"));
    const int input_dim = 3 + trial % 3;
    const int classes = 2 + trial % 3;
    const std::vector<int> hidden = (trial % 2 == 0) ? std::vector<int>{5}
                                                     : std::vector<int>{4, 4};
    const ModelParams model = testutil::random_model(seed, input_dim, hidden, classes, 0.4);
    Rng rng = make_rng(derive_seed(seed, stream_tag("data")));

    Batch batch;
    batch.inputs = testutil::random_matrix(rng, 4, input_dim, 0.8);
    Matrix targets(4, classes);
    for (int r = 0; r < 4; ++r) targets(r, uniform_index(rng, classes)) = 1.0;
    batch.targets = targets;

    LossWeights lw;
    lw.lambda_s = 1.3;
    lw.lambda_1 = 0.7;
    lw.lambda_2 = 0.9;
    lw.lambda_l1 = 0.05;

    // supervised CE
    {
      const LossResult lr = supervised_loss(model, batch, lw);
      const auto num = testutil::numeric_gradient(
          [&](const ModelParams& m) { return supervised_loss(m, batch, lw).value; }, model);
      record("supervised_ce", trial, testutil::max_rel_error(lr.gradient.values, num));
    }

    // pseudo-label CE over constant labels
    PseudoLabelBatch pl;
    pl.accepted_inputs = testutil::random_matrix(rng, 3, input_dim, 0.8);
    pl.one_hot_labels = Matrix(3, classes);
    for (int r = 0; r < 3; ++r) pl.one_hot_labels(r, uniform_index(rng, classes)) = 1.0;
    pl.accepted_mask = {1, 1, 1};
    pl.accepted_rows = {0, 1, 2};
    pl.acceptance_rate = 1.0;
    {
      const LossResult lr = pseudo_label_ce(model, pl, lw.lambda_1);
      const auto num = testutil::numeric_gradient(
          [&](const ModelParams& m) { return pseudo_label_ce(m, pl, lw.lambda_1).value; },
          model);
      record("pseudo_label_ce", trial, testutil::max_rel_error(lr.gradient.values, num));
    }

    const Matrix unlabeled = testutil::random_matrix(rng, 3, input_dim, 0.8);
    AugmentSpec view1, view2;
    view1.kind = AugmentKind::jitter;
    view1.jitter_stddev = 0.1;
    view2 = view1;
    const std::uint64_t view_seed = derive_seed(seed, stream_tag("views"));

    // consistency, both flavors (views are re-derived from view_seed on every
    // probe, so the finite difference sees a fixed function)
    {
      const LossResult lr = consistency_l2(model, unlabeled, view1, view2, lw.lambda_2, view_seed);
      const auto num = testutil::numeric_gradient(
          [&](const ModelParams& m) {
            return consistency_l2(m, unlabeled, view1, view2, lw.lambda_2, view_seed).value;
          },
          model);
      record("consistency_l2", trial, testutil::max_rel_error(lr.gradient.values, num));
    }
    {
      const LossResult lr = consistency_kl(model, unlabeled, view1, lw.lambda_2, view_seed);
      const auto num = testutil::numeric_gradient(
          [&](const ModelParams& m) {
            return consistency_kl(m, unlabeled, view1, lw.lambda_2, view_seed).value;
          },
          model);
      record("consistency_kl", trial, testutil::max_rel_error(lr.gradient.values, num));
    }

    // proximal pull toward an independently drawn sigma
    const ModelParams sigma =
        testutil::random_model(seed + 1, input_dim, hidden, classes, 0.4);
    {
      const LossResult lr = proximal_term(model, sigma, lw.lambda_l1);
      const auto num = testutil::numeric_gradient(
          [&](const ModelParams& m) { return proximal_term(m, sigma, lw.lambda_l1).value; },
          model);
      record("proximal", trial, testutil::max_rel_error(lr.gradient.values, num));
    }

    // whole client objective
    UnsupLossOptions opts;
    opts.weights = lw;
    opts.consistency = (trial % 2 == 0) ? ConsistencyKind::l2 : ConsistencyKind::kl;
    opts.view1 = view1;
    opts.view2 = view2;
    {
      const LossResult lr = unsupervised_loss(model, unlabeled, pl, sigma, opts, view_seed);
      const auto num = testutil::numeric_gradient(
          [&](const ModelParams& m) {
            return unsupervised_loss(m, unlabeled, pl, sigma, opts, view_seed).value;
          },
          model);
      record("unsupervised_total", trial, testutil::max_rel_error(lr.gradient.values, num));
    }
  }

  if (worst >= kTol) {
    why = "worst relative error " + fmt(worst) + " at " + worst_site;
    return false;
  }
  why.clear();
  return true;
}

// ---- criterion 3: mixing identities ----------------------------------------

bool check_mixing_identities(std::string& why) {
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint64_t seed = derive_seed(900 + trial, stream_tag("accept-mix"));
    const ModelParams psi = testutil::random_model(seed, 5, {6}, 3, 0.5);
    const ModelParams sigma = testutil::random_model(seed + 1, 5, {6}, 3, 0.5);
    const ModelParams omega = testutil::random_model(seed + 2, 5, {6}, 3, 0.5);

    const ModelParams at_psi = fedmix_mix(psi, sigma, omega, 1.0, 0.0, 0.0);
    const ModelParams at_sigma = fedmix_mix(psi, sigma, omega, 0.0, 1.0, 0.0);
    const ModelParams at_omega = fedmix_mix(psi, sigma, omega, 0.0, 0.0, 1.0);
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
      if (at_psi.values[i] != psi.values[i] || at_sigma.values[i] != sigma.values[i] ||
          at_omega.values[i] != omega.values[i]) {
        why = "vertex case not exact at coordinate " + std::to_string(i);
        return false;
      }
    }

    Rng rng = make_rng(derive_seed(seed, stream_tag("coeffs")));
    const double a = uniform01(rng);
    const double b = (1.0 - a) * uniform01(rng);
    const double g = 1.0 - a - b;
    const ModelParams mixed = fedmix_mix(psi, sigma, omega, a, b, g);
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
      const double lo = std::min({psi.values[i], sigma.values[i], omega.values[i]});
      const double hi = std::max({psi.values[i], sigma.values[i], omega.values[i]});
      // convex hull up to accumulated rounding of the three products
      const double slack =
          4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi));
      if (mixed.values[i] < lo - slack || mixed.values[i] > hi + slack) {
        why = "coordinate " + std::to_string(i) + " = " + fmt(mixed.values[i]) +
              " outside [" + fmt(lo) + ", " + fmt(hi) + "]";
        return false;
      }
    }
  }
  return true;
}

// ---- criterion 4: partition sampler moments ---------------------------------

bool check_dirichlet_moments(std::string& why) {
  const std::vector<double> mus = {0.1, 1.0, 10.0, 100.0};
  const int dim = 10;
  const int draws = 1000;
  std::vector<double> pooled_var;
  for (double mu : mus) {
    Rng rng = make_rng(derive_seed(77, stream_tag("accept-dirichlet"),
                                   static_cast<std::uint64_t>(mu * 10.0)));
    std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0);
    for (int d = 0; d < draws; ++d) {
      const std::vector<double> p = sample_dirichlet(mu, dim, rng);
      for (int c = 0; c < dim; ++c) {
        sum[c] += p[c];
        sumsq[c] += p[c] * p[c];
      }
    }
    double var_acc = 0.0;
    for (int c = 0; c < dim; ++c) {
      const double mean = sum[c] / draws;
      const double var = (sumsq[c] - draws * mean * mean) / (draws - 1);
      const double se = std::sqrt(var / draws);
      if (std::abs(mean - 1.0 / dim) > 3.0 * se) {
        why = "mu=" + fmt(mu) + " class " + std::to_string(c) + " mean " + fmt(mean) +
              " is " + fmt(std::abs(mean - 0.1) / se) + " SEs from 0.1";
        return false;
      }
      var_acc += var;
    }
    pooled_var.push_back(var_acc / dim);
  }
  for (std::size_t i = 1; i < pooled_var.size(); ++i) {
    if (!(pooled_var[i] < pooled_var[i - 1])) {
      why = "variance not decreasing: var(mu=" + fmt(mus[i - 1]) + ")=" + fmt(pooled_var[i - 1]) +
            " vs var(mu=" + fmt(mus[i]) + ")=" + fmt(pooled_var[i]);
      return false;
    }
  }
  return true;
}

// ---- criteria 5-7 and 9 share desk-scale runs -------------------------------

struct DeskRuns {
  std::vector<RunResult> fedmix;      // per seed, mu = 0.5
  std::vector<RunResult> naive;       // per seed
  std::vector<RunResult> supervised;  // per seed
};

ExperimentConfig desk_config() {
  ExperimentConfig cfg;  // defaults are the desk-scale setup
  cfg.name = "desk";
  return cfg;
}

DeskRuns run_desk_comparison(const fs::path& scratch) {
  const ExperimentConfig base = desk_config();
  DeskRuns out;
  for (std::uint64_t seed : base.seeds) {
    ExperimentConfig cfg = base;
    const std::string tag = "seed" + std::to_string(seed);
    out.fedmix.push_back(run_single(cfg, seed, scratch / "fedmix" / tag));
    cfg.fed.aggregator = Aggregator::naive_decomposition;
    out.naive.push_back(run_single(cfg, seed, scratch / "naive" / tag));
    cfg.fed.aggregator = Aggregator::fedavg_supervised_only;
    out.supervised.push_back(run_single(cfg, seed, scratch / "supervised" / tag));
  }
  return out;
}

bool check_method_comparison(const DeskRuns& runs, std::string& why) {
  int wins = 0, above_floor = 0;
  const std::size_t n = runs.fedmix.size();
  std::string detail;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = runs.fedmix[i].final_accuracy;
    const double nv = runs.naive[i].final_accuracy;
    const double s = runs.supervised[i].final_accuracy;
    if (f >= nv) ++wins;
    if (f > s && nv > s) ++above_floor;
    detail += " [seed " + std::to_string(runs.fedmix[i].seed) + ": fedmix " + fmt(f) +
              ", naive " + fmt(nv) + ", floor " + fmt(s) + "]";
  }
  if (wins < 4) {
    why = "fedmix beat naive in only " + std::to_string(wins) + "/5 seeds:" + detail;
    return false;
  }
  if (above_floor != static_cast<int>(n)) {
    why = "above supervised floor in only " + std::to_string(above_floor) + "/5 seeds:" + detail;
    return false;
  }
  return true;
}

bool check_noniid_robustness(const fs::path& grid_dir, std::string& why) {
  const auto doc = slurp(grid_dir / "desk" / "grid.json");
  // grid.json is machine-written; pull mean_final_acc per cell with a scan so
  // this check does not depend on the json library.
  std::vector<double> means;
  std::size_t pos = 0;
  while ((pos = doc.find("\"mean_final_acc\":", pos)) != std::string::npos) {
    pos += 17;
    means.push_back(std::stod(doc.substr(pos)));
  }
  if (means.size() != 4) {
    why = "expected 4 grid cells, found " + std::to_string(means.size());
    return false;
  }
  const double lo = *std::min_element(means.begin(), means.end());
  const double hi = *std::max_element(means.begin(), means.end());
  if (hi - lo > 0.05) {
    why = "accuracy spread " + fmt(hi - lo) + " over mu grid (" + fmt(lo) + ".." + fmt(hi) + ")";
    return false;
  }
  why = "spread " + fmt(hi - lo);  // informational; cleared by caller on pass
  return true;
}

bool check_pseudo_label_contract(const DeskRuns& runs, std::string& why) {
  // (a) a uniform-output model accepts nothing at tau = 0.80
  const ModelParams flat = zeros_like(init_model(8, {6}, 10, 1));
  Rng rng = make_rng(derive_seed(5, stream_tag("accept-pl")));
  const Matrix u = testutil::random_matrix(rng, 40, 8, 1.0);
  AugmentSpec jitter;
  jitter.kind = AugmentKind::jitter;
  jitter.jitter_stddev = 0.05;
  const AugmentFamily family{{jitter}};
  PseudoLabelConfig plc;  // tau = 0.80, A = 5
  const PseudoLabelBatch pl = make_pseudo_labels(flat, u, family, plc, 99);
  if (pl.accepted_count() != 0 || pl.acceptance_rate != 0.0) {
    why = "uniform model accepted " + std::to_string(pl.accepted_count()) + " rows";
    return false;
  }

  // (b) acceptance climbs over training: last-third block mean must beat the
  // first third in >= 4/5 seeds
  int rising = 0, precise = 0;
  std::string detail;
  for (const RunResult& r : runs.fedmix) {
    const int T = static_cast<int>(r.rounds.size());
    const int third = T / 3;
    double first = 0.0, last = 0.0;
    for (int t = 0; t < third; ++t) first += r.rounds[t].acceptance;
    for (int t = T - third; t < T; ++t) last += r.rounds[t].acceptance;
    first /= third;
    last /= third;
    if (last > first) ++rising;

    // (c) accepted-label precision vs raw labeler accuracy, late rounds
    double prec = 0.0, acc = 0.0;
    for (int t = T - third; t < T; ++t) {
      prec += r.rounds[t].precision;
      acc += r.rounds[t].labeler_accuracy;
    }
    if (prec > acc) ++precise;
    detail += " [seed " + std::to_string(r.seed) + ": accept " + fmt(first) + "->" + fmt(last) +
              ", prec " + fmt(prec / third) + " vs acc " + fmt(acc / third) + "]";
  }
  if (rising < 4) {
    why = "acceptance rose in only " + std::to_string(rising) + "/5 seeds:" + detail;
    return false;
  }
  if (precise < 4) {
    why = "precision beat accuracy in only " + std::to_string(precise) + "/5 seeds:" + detail;
    return false;
  }
  return true;
}

// ---- criterion 8: oracle equivalences ---------------------------------------

bool check_oracle_equivalences(std::string& why) {
  // equal frequencies -> exactly uniform
  for (int s = 2; s <= 16; ++s) {
    for (int q : {1, 3, 7, 12}) {
      const FreqWeights fw = fedfreq_weights(std::vector<int>(s, q));
      for (double w : fw.w) {
        if (w != 1.0 / s) {
          why = "equal-frequency weight " + fmt(w) + " != 1/" + std::to_string(s);
          return false;
        }
      }
    }
  }

  // count-weighted FedAvg over equal counts == arithmetic mean, bit for bit
  // (power-of-two cohorts, where scaling by 1/n is exact)
  for (int n : {2, 4, 8, 16}) {
    std::vector<ModelParams> models;
    for (int k = 0; k < n; ++k) {
      models.push_back(testutil::random_model(derive_seed(300 + n, stream_tag("avg"),
                                                          static_cast<std::uint64_t>(k)),
                                              4, {5}, 3, 0.5));
    }
    const ModelParams agg = aggregate_weighted(models, count_weights(std::vector<int>(n, 9)));
    for (std::size_t i = 0; i < agg.values.size(); ++i) {
      double acc = 0.0;
      for (const ModelParams& m : models) acc += m.values[i] * (1.0 / n);
      if (agg.values[i] != acc) {
        why = "fedavg mean mismatch at coordinate " + std::to_string(i) + " (n=" +
              std::to_string(n) + ")";
        return false;
      }
    }
  }

  // composite loss == sum of separately computed parts
  for (int trial = 0; trial < 10; ++trial) {
    const std::uint64_t seed = derive_seed(700 + trial, stream_tag("accept-sum"));
    const ModelParams psi = testutil::random_model(seed, 4, {5}, 3, 0.4);
    const ModelParams sigma = testutil::random_model(seed + 1, 4, {5}, 3, 0.4);
    Rng rng = make_rng(derive_seed(seed, stream_tag("data")));
    const Matrix u = testutil::random_matrix(rng, 5, 4, 0.8);

    PseudoLabelBatch pl;
    pl.accepted_inputs = testutil::random_matrix(rng, 2, 4, 0.8);
    pl.one_hot_labels = Matrix(2, 3);
    pl.one_hot_labels(0, 1) = 1.0;
    pl.one_hot_labels(1, 2) = 1.0;
    pl.accepted_mask = {1, 1};
    pl.accepted_rows = {0, 1};
    pl.acceptance_rate = 0.4;

    UnsupLossOptions opts;
    opts.consistency = (trial % 2 == 0) ? ConsistencyKind::l2 : ConsistencyKind::kl;
    opts.view1.kind = AugmentKind::jitter;
    opts.view1.jitter_stddev = 0.1;
    opts.view2 = opts.view1;

    LossBreakdown parts;
    const LossResult total = unsupervised_loss(psi, u, pl, sigma, opts, seed, &parts);
    const double replay = parts.pseudo_ce + parts.consistency + parts.proximal;
    if (std::abs(total.value - replay) > 1e-12) {
      why = "total " + fmt(total.value) + " vs component sum " + fmt(replay);
      return false;
    }

    // the breakdown itself must match independent evaluations of each term
    const double ce = pseudo_label_ce(psi, pl, opts.weights.lambda_1).value;
    const double cons =
        (opts.consistency == ConsistencyKind::l2)
            ? consistency_l2(psi, u, opts.view1, opts.view2, opts.weights.lambda_2, seed).value
            : consistency_kl(psi, u, opts.view1, opts.weights.lambda_2, seed).value;
    const double prox = proximal_term(psi, sigma, opts.weights.lambda_l1).value;
    if (std::abs(parts.pseudo_ce - ce) > 1e-12 || std::abs(parts.consistency - cons) > 1e-12 ||
        std::abs(parts.proximal - prox) > 1e-12) {
      why = "breakdown disagrees with standalone terms (trial " + std::to_string(trial) + ")";
      return false;
    }
  }
  return true;
}

// ---- criterion 9: grid determinism ------------------------------------------

std::map<std::string, std::string> collect_metric_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "metrics.csv") {
      out[fs::relative(entry.path(), root).generic_string()] = slurp(entry.path());
    }
  }
  return out;
}

bool check_grid_determinism(const fs::path& a, const fs::path& b, std::string& why) {
  const auto fa = collect_metric_files(a);
  const auto fb = collect_metric_files(b);
  if (fa.empty()) {
    why = "no metrics.csv files produced";
    return false;
  }
  if (fa.size() != fb.size()) {
    why = "run count differs: " + std::to_string(fa.size()) + " vs " + std::to_string(fb.size());
    return false;
  }
  for (const auto& [rel, text] : fa) {
    const auto it = fb.find(rel);
    if (it == fb.end()) {
      why = "second execution missing " + rel;
      return false;
    }
    if (it->second != text) {
      why = "bytes differ for " + rel;
      return false;
    }
  }
  why = std::to_string(fa.size()) + " files compared";  // informational
  return true;
}

// ---- criterion 10: cifar loader fixture -------------------------------------

bool check_cifar_fixture(const fs::path& scratch, std::string& why) {
  const fs::path good = scratch / "fixture.bin";
  const fs::path bad = scratch / "truncated.bin";
  const int record = 3073;
  std::vector<unsigned char> bytes;
  const int labels[3] = {7, 0, 9};
  for (int r = 0; r < 3; ++r) {
    bytes.push_back(static_cast<unsigned char>(labels[r]));
    for (int i = 0; i < record - 1; ++i) {
      bytes.push_back(static_cast<unsigned char>((r * 131 + i * 17) % 256));
    }
  }
  std::ofstream(good, std::ios::binary)
      .write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));

  const Dataset ds = load_cifar10(good.string());
  if (ds.inputs.rows() != 3 || ds.inputs.cols() != 3072 || ds.class_count != 10) {
    why = "parsed shape " + std::to_string(ds.inputs.rows()) + "x" +
          std::to_string(ds.inputs.cols());
    return false;
  }
  for (int r = 0; r < 3; ++r) {
    if (ds.labels[r] != labels[r]) {
      why = "label " + std::to_string(r) + " = " + std::to_string(ds.labels[r]);
      return false;
    }
    for (int i = 0; i < record - 1; ++i) {
      const double expected = ((r * 131 + i * 17) % 256) / 255.0;
      if (ds.inputs(r, i) != expected) {
        why = "pixel (" + std::to_string(r) + "," + std::to_string(i) + ") = " +
              fmt(ds.inputs(r, i)) + ", want " + fmt(expected);
        return false;
      }
    }
  }

  // cut the third record short; the error must name its byte offset (6146)
  std::ofstream(bad, std::ios::binary)
      .write(reinterpret_cast<const char*>(bytes.data()), 2 * record + 100);
  try {
    load_cifar10(bad.string());
    why = "truncated file parsed without error";
    return false;
  } catch (const FormatError& e) {
    if (std::string(e.what()).find(std::to_string(2 * record)) == std::string::npos) {
      why = std::string("error does not name byte offset 6146: \"") + e.what() + "\"";
      return false;
    }
  }
  return true;
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / "fedmix_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  Gate gate;
  gate.check(1, "frequency weights: sum 1, nonneg, anti-monotone x1000", 1.0,
             [](std::string& why) { return check_fedfreq_algebra(why); });
  gate.check(2, "gradients match finite differences on 20 random models", 30.0,
             [](std::string& why) { return check_gradient_suite(why); });
  gate.check(3, "mixing vertices exact, interior stays in convex hull", 0.0,
             [](std::string& why) { return check_mixing_identities(why); });
  gate.check(4, "dirichlet moments: mean 1/C, variance falls with mu", 10.0,
             [](std::string& why) { return check_dirichlet_moments(why); });

  DeskRuns desk;
  gate.check(5, "desk run: fedmix >= naive 4/5 seeds, both beat floor 5/5", 600.0,
             [&](std::string& why) {
               desk = run_desk_comparison(scratch / "comparison");
               return check_method_comparison(desk, why);
             });

  const fs::path grid_a = scratch / "grid_a";
  const fs::path grid_b = scratch / "grid_b";
  gate.check(6, "fedmix accuracy spread <= 5pp over mu {0.1,1,10,100}", 0.0,
             [&](std::string& why) {
               ExperimentConfig cfg = desk_config();
               run_grid(cfg, "partition.mu", {"0.1", "1", "10", "100"}, grid_a);
               const bool ok = check_noniid_robustness(grid_a, why);
               return ok;
             });
  gate.check(7, "pseudo labels: uniform model rejects; acceptance climbs", 0.0,
             [&](std::string& why) {
               if (desk.fedmix.empty()) {
                 why = "desk runs unavailable (criterion 5 failed earlier)";
                 return false;
               }
               return check_pseudo_label_contract(desk, why);
             });
  gate.check(8, "oracles: uniform fedfreq, exact fedavg mean, loss sum", 0.0,
             [](std::string& why) { return check_oracle_equivalences(why); });
  gate.check(9, "grid rerun is byte-identical (metrics.csv)", 0.0,
             [&](std::string& why) {
               ExperimentConfig cfg = desk_config();
               run_grid(cfg, "partition.mu", {"0.1", "1", "10", "100"}, grid_b);
               return check_grid_determinism(grid_a, grid_b, why);
             });
  gate.check(10, "cifar fixture parses exactly; truncation names offset", 0.0,
             [&](std::string& why) { return check_cifar_fixture(scratch, why); });

  fs::remove_all(scratch);
  if (gate.failures > 0) {
    std::printf("%d criterion(s) failed\n", gate.failures);
    return 1;
  }
  std::printf("all 10 criteria passed\n");
  return 0;
}
