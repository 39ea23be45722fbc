// Acceptance suite: one pass/fail line per criterion. Runs without any
// external artifacts; every fixture is generated in-process or through the
// CLI. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "json.hpp"
#include "kfair/bounds.hpp"
#include "kfair/cluster.hpp"
#include "kfair/data.hpp"
#include "kfair/explain.hpp"
#include "kfair/milp.hpp"
#include "kfair/mitigate.hpp"
#include "kfair/report.hpp"
#include "kfair/search.hpp"
#include "kfair/simplex.hpp"
#include "oracle.hpp"

using namespace kfair;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Harness {
  int failures = 0;

  void criterion(const std::string& name, const std::function<bool(std::string&)>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::ostringstream line;
    line << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) line << " -- " << detail;
    line << " (" << std::fixed << secs << "s)";
    std::cout << line.str() << std::endl;
    if (!ok) ++failures;
  }
};

Dataset uniform_rows(const FeatureSchema& schema, std::size_t n,
                     std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    data.rows.push_back(schema.random_instance(rng));
  }
  return data;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KFAIR_CLI_PATH) + " " + args +
                          " >/dev/null 2>/dev/null";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

// -------------------------------------------------------------------------
// Criterion 1: MILP optimality oracle on discrete random networks.
// -------------------------------------------------------------------------
bool milp_optimality(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240801);
  int checked = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    // <= 6 categorical inputs with <= 4 levels each (incl. protected),
    // <= 2 hidden layers.
    const std::size_t levels_a = 2 + rng.uniform_index(2);  // 2..3
    const std::size_t levels_b = 2 + rng.uniform_index(3);  // 2..4
    const FeatureSchema schema =
        testing::categorical_schema({levels_a, levels_b}, {3});
    const std::size_t h1 = 3 + rng.uniform_index(3);
    const bool two_layers = trial % 2 == 0;
    std::vector<std::size_t> hidden = {h1};
    if (two_layers) hidden.push_back(2 + rng.uniform_index(3));
    const std::size_t outputs = trial % 3 == 0 ? 2 : 1;
    const Network net = testing::random_network(rng, schema.encoded_width(),
                                                hidden, outputs, 0.9);

    const Box box = unit_box(schema.encoded_width());
    const MilpProblem problem =
        encode_pair_fairness(net, schema, propagate(net, box), 0.05, box);
    SolveConfig cfg;
    cfg.tolerance = 1e-7;
    cfg.timeout_seconds = 30.0;
    const SolveResult res = solve(problem, cfg);
    if (res.status != SolveStatus::Optimal) {
      detail = "trial " + std::to_string(trial) + ": solver status not optimal";
      return false;
    }
    const auto want = oracle::max_pair_logit_gap(net, schema);
    const double err = std::abs(*res.objective_value - want.max_gap);
    worst = std::max(worst, err);
    if (err > 1e-6) {
      detail = "trial " + std::to_string(trial) + ": |milp - brute| = " +
               std::to_string(err);
      return false;
    }
    ++checked;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::ostringstream ss;
  ss << checked << " networks, worst |milp - enum| = " << worst << ", "
     << secs << "s";
  detail = ss.str();
  return checked >= 20 && secs < 300.0;
}

// -------------------------------------------------------------------------
// Criterion 2: certification soundness via massive sampling.
// -------------------------------------------------------------------------
bool certification_soundness(std::string& detail) {
  Rng rng(77001);
  int fair_networks = 0;
  std::uint64_t pairs_checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const FeatureSchema schema = testing::categorical_schema({3, 2}, {4});
    Network net = testing::random_network(rng, schema.encoded_width(), {5}, 1, 0.8);
    // Shrink the output layer so the logit spread drops under the threshold;
    // certification must still prove it.
    for (auto& w : net.layers.back().weights.data) w *= 0.02;
    CertifyConfig cfg;
    cfg.solve.timeout_seconds = 30.0;
    const Certificate cert = certify(net, schema, 0.05, cfg);
    if (cert.verdict != Verdict::Fair) continue;
    ++fair_networks;

    // 100,000 sampled counterfactual pairs per fair-certified network.
    Rng sample_rng(rng.next_u64());
    for (int i = 0; i < 100000; ++i) {
      const Instance inst = schema.random_instance(sample_rng);
      Vector encoded = schema.encode(inst);
      const std::size_t a = sample_rng.uniform_index(schema.K());
      const std::size_t b = sample_rng.uniform_index(schema.K());
      schema.apply_combo(encoded, a);
      const double sa = oracle::score_reference(net, encoded);
      schema.apply_combo(encoded, b);
      const double sb = oracle::score_reference(net, encoded);
      ++pairs_checked;
      if (std::abs(sa - sb) > 0.05) {
        detail = "violation on a fair-certified network";
        return false;
      }
    }
  }
  detail = std::to_string(fair_networks) + " fair networks, " +
           std::to_string(pairs_checked) + " pairs, zero violations";
  return fair_networks >= 3;
}

// -------------------------------------------------------------------------
// Criterion 3: counterexample validity (certificates and search ids).
// -------------------------------------------------------------------------
bool counterexample_validity(std::string& detail) {
  std::size_t validated = 0;

  // Unfair certificates on planted networks with different offset spreads.
  // Offsets step by 0.08 so adjacent pairs exceed epsilon strictly.
  for (std::size_t target : {2, 3, 4}) {
    auto bundle = testing::planted_bundle(4, target);
    for (std::size_t c = 0; c < bundle.plant.offsets.size(); ++c) {
      const std::size_t bucket = c < target ? c : target - 1;
      bundle.plant.offsets[c] = 0.08 * static_cast<double>(bucket);
    }
    bundle.net = make_planted_network(bundle.schema, bundle.plant);
    CertifyConfig cfg;
    cfg.solve.timeout_seconds = 60.0;
    const Certificate cert = certify(bundle.net, bundle.schema, 0.05, cfg);
    if (cert.verdict != Verdict::Unfair || !cert.counterexample) {
      detail = "planted network not flagged unfair";
      return false;
    }
    // Independent forward passes only.
    const auto& cex = *cert.counterexample;
    Vector encoded = bundle.schema.encode(cex.instance);
    bundle.schema.apply_combo(encoded, cex.combo_a);
    const double sa = oracle::score_reference(bundle.net, encoded);
    bundle.schema.apply_combo(encoded, cex.combo_b);
    const double sb = oracle::score_reference(bundle.net, encoded);
    if (!(std::abs(sa - sb) > 0.05)) {
      detail = "certificate counterexample fails re-validation";
      return false;
    }
    ++validated;
  }

  // Search-reported IDs re-validate with the reference forward pass.
  const auto bundle = testing::planted_bundle(6, 5);
  SearchConfig cfg;
  cfg.max_iterations = 8000;
  cfg.timeout_seconds = 120.0;
  cfg.rng_seed = 5;
  cfg.solver_timeout_seconds = 20.0;
  const SearchReport report =
      run_search(bundle.net, bundle.schema, uniform_rows(bundle.schema, 300, 9), cfg);
  if (report.ids.empty()) {
    detail = "search found no ids on the planted network";
    return false;
  }
  for (const auto& [inst, k] : report.ids) {
    Vector encoded = bundle.schema.encode(inst);
    std::vector<std::optional<double>> scores;
    for (std::size_t c = 0; c < bundle.schema.K(); ++c) {
      bundle.schema.apply_combo(encoded, c);
      scores.emplace_back(oracle::score_reference(bundle.net, encoded));
    }
    const auto [buckets, k_ref] = cluster_scores(scores, 0.05);
    if (k_ref != k || k_ref < 2) {
      detail = "search id fails independent re-validation";
      return false;
    }
    ++validated;
  }
  detail = std::to_string(validated) + " counterexamples re-validated (100%)";
  return true;
}

// -------------------------------------------------------------------------
// Criterion 4: planted max-k recovery and SA-vs-RW time-to-target.
// -------------------------------------------------------------------------
bool planted_recovery(std::string& detail) {
  std::ostringstream summary;
  for (const std::size_t target : {std::size_t{5}, std::size_t{12}, std::size_t{20}}) {
    const auto bundle = testing::staged_bundle(target);
    const Dataset data = uniform_rows(bundle.schema, 1500, 1000 + target);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      SearchConfig cfg;
      cfg.strategy = SearchStrategy::SimulatedAnnealing;
      cfg.timeout_seconds = 60.0;
      cfg.target_k = target;
      cfg.rng_seed = seed;
      cfg.stagnation_limit = 1000;
      cfg.solver_timeout_seconds = 5.0;
      const SearchReport r = run_search(bundle.net, bundle.schema, data, cfg);
      hits += r.max_k >= target ? 1 : 0;
    }
    summary << "k=" << target << ": " << hits << "/10 ";
    if (hits < 8) {
      detail = summary.str() + "(below 8/10)";
      return false;
    }
  }

  // Paired SA vs RW time-to-max on the k=20 plant (censored at the budget).
  const auto bundle = testing::staged_bundle(20);
  const Dataset data = uniform_rows(bundle.schema, 1500, 4040);
  double sa_total = 0.0, rw_total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const auto strategy :
         {SearchStrategy::SimulatedAnnealing, SearchStrategy::RandomWalk}) {
      SearchConfig cfg;
      cfg.strategy = strategy;
      cfg.timeout_seconds = 60.0;
      cfg.target_k = 20;
      cfg.rng_seed = seed;
      cfg.stagnation_limit = 1000;
      cfg.solver_timeout_seconds = 5.0;
      const SearchReport r = run_search(bundle.net, bundle.schema, data, cfg);
      const double t = r.max_k >= 20 && r.t_max_k_seconds ? *r.t_max_k_seconds
                                                          : 60.0;
      (strategy == SearchStrategy::SimulatedAnnealing ? sa_total : rw_total) += t;
    }
  }
  summary << "| mean t_maxk SA=" << sa_total / 10.0 << "s RW=" << rw_total / 10.0
          << "s";
  detail = summary.str();
  return sa_total < rw_total;
}

// -------------------------------------------------------------------------
// Criterion 5: explanation fidelity on the planted fixture.
// -------------------------------------------------------------------------
bool explanation_fidelity(std::string& detail) {
  const auto bundle = testing::planted_bundle(8, 6);
  ExplainConfig cfg;
  cfg.n_samples = 5000;
  cfg.rng_seed = 31;
  cfg.tree_min_leaf = 20;
  std::vector<Instance> seeds;
  for (double x : {0.4, 0.5, 0.6}) {
    seeds.push_back(testing::instance_at(bundle.schema, x, 0.5, 0));
  }
  const ExplainOutcome out = run_explain(bundle.net, bundle.schema, seeds, cfg);
  if (out.accepted.empty()) {
    detail = "no predicate accepted";
    return false;
  }
  // The predicate that covers the region center is the region explanation.
  const Instance center = testing::instance_at(bundle.schema, 0.5, 0.5, 0);
  const ExplanationPredicate* pred = nullptr;
  for (const auto& p : out.accepted) {
    if (p.satisfied_by(bundle.schema, center)) pred = &p;
  }
  if (!pred) {
    detail = "no accepted predicate covers the region center";
    return false;
  }

  std::size_t tp = 0, fp = 0, fn = 0;
  Rng rng(555);
  for (int i = 0; i < 10000; ++i) {
    const Instance inst = bundle.schema.random_instance(rng);
    const bool truly = inside_plant_region(bundle.schema, bundle.plant, inst);
    const bool pred_says = pred->satisfied_by(bundle.schema, inst);
    tp += truly && pred_says;
    fp += !truly && pred_says;
    fn += truly && !pred_says;
  }
  const double precision = tp / std::max(1.0, double(tp + fp));
  const double recall = tp / std::max(1.0, double(tp + fn));

  // Analytic volume of [0.3,0.7]^2 over the two numeric features.
  const double true_volume = 0.4 * 0.4;
  const double vol_err = std::abs(pred->coverage_volume - true_volume) / true_volume;

  std::ostringstream ss;
  ss << "precision=" << precision << " recall=" << recall
     << " cov=" << pred->coverage_volume << " (true " << true_volume << ")"
     << " diff=" << pred->robustness_diff;
  detail = ss.str();
  return precision >= 0.9 && recall >= 0.9 && vol_err <= 0.10 &&
         pred->robustness_diff >= double(bundle.target_k) - 2.0;
}

// -------------------------------------------------------------------------
// Criterion 6: mitigation effect (guards + fine-tuning accuracy budget).
// -------------------------------------------------------------------------
bool mitigation_effect(std::string& detail) {
  // k = 11 puts exactly one combo's score above the 0.5 label boundary, so
  // majority-label augmentation contradicts the original on ~1.5% of the
  // space; retraining must absorb that without losing more than 2 points.
  const auto bundle = testing::planted_bundle(11, 11);
  const Dataset data = sample_labeled_dataset(bundle.schema, bundle.net, 1200, 61);
  auto [train, holdout] = train_test_split(data, 0.8, 7);

  // Guard straight from the explanation pipeline.
  ExplainConfig ecfg;
  ecfg.n_samples = 3000;
  ecfg.rng_seed = 17;
  std::vector<Instance> seeds = {testing::instance_at(bundle.schema, 0.5, 0.5, 0),
                                 testing::instance_at(bundle.schema, 0.45, 0.55, 1)};
  const ExplainOutcome explained =
      run_explain(bundle.net, bundle.schema, seeds, ecfg);
  if (explained.accepted.empty()) {
    detail = "explanation produced no guard";
    return false;
  }

  // Fine-tune on the augmented dataset (ids from a short search).
  SearchConfig scfg;
  scfg.max_iterations = 6000;
  scfg.timeout_seconds = 120.0;
  scfg.rng_seed = 3;
  scfg.solver_timeout_seconds = 10.0;
  const SearchReport found = run_search(bundle.net, bundle.schema, train, scfg);
  std::vector<DiscriminationRecord> records;
  for (const auto& [inst, k] : found.ids) {
    DiscriminationRecord rec;
    rec.instance = inst;
    rec.k_value = k;
    records.push_back(std::move(rec));
    if (records.size() >= 200) break;
  }
  const Dataset augmented = augment_dataset(train, records, bundle.schema, bundle.net);
  FineTuneConfig ft;
  ft.epochs = 3;
  ft.learning_rate = 5e-4;
  ft.rng_seed = 5;
  const Network debiased = fine_tune(bundle.net, augmented, bundle.schema, ft);

  MitigateConfig mcfg;
  mcfg.search.max_iterations = 20000;
  mcfg.search.timeout_seconds = 120.0;
  mcfg.search.use_solver = false;  // identical seeds, pure randomized compare
  mcfg.search.rng_seed = 11;
  const MitigationReport report =
      evaluate_mitigation(bundle.net, debiased, explained.accepted,
                          bundle.schema, train, holdout, mcfg);

  const double succ_plain = report.rows[0].search.success_rate;
  const double succ_guarded = report.rows[1].search.success_rate;
  const double acc_orig = report.rows[0].accuracy_percent;
  const double acc_debiased = report.rows[2].accuracy_percent;

  std::ostringstream ss;
  ss << "succ " << succ_plain << "% -> " << succ_guarded << "%, acc "
     << acc_orig << "% -> " << acc_debiased << "%";
  detail = ss.str();
  if (succ_plain <= 0.0) {
    detail += " (no ids found on the original model)";
    return false;
  }
  return succ_guarded <= 0.5 * succ_plain &&
         std::abs(acc_orig - acc_debiased) <= 2.0;
}

// -------------------------------------------------------------------------
// Criterion 7: numerical kernels (gradients, bounds, simplex).
// -------------------------------------------------------------------------
bool numerical_kernels(std::string& detail) {
  Rng rng(880011);

  // Backprop vs central finite differences on random 2-layer networks.
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t outputs = trial % 2 ? 2 : 1;
    const Network net = testing::random_network(rng, 4, {5, 4}, outputs, 0.7);
    Vector x(4);
    for (auto& v : x) v = rng.uniform();
    const std::size_t label = rng.uniform_index(2);
    const Vector analytic = loss_gradient(net, x, label);

    Vector params;
    for (const DenseLayer& l : net.layers) {
      params.insert(params.end(), l.weights.data.begin(), l.weights.data.end());
      params.insert(params.end(), l.bias.begin(), l.bias.end());
    }
    auto rebuild = [&](const Vector& p) {
      Network n = net;
      std::size_t pos = 0;
      for (DenseLayer& l : n.layers) {
        for (auto& w : l.weights.data) w = p[pos++];
        for (auto& b : l.bias) b = p[pos++];
      }
      return n;
    };
    const Vector numeric = oracle::finite_difference_gradient(
        [&](const Vector& p) { return loss_value(rebuild(p), x, label); },
        params, 1e-6);
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double scale = std::max(1.0, std::abs(analytic[i]));
      if (std::abs(analytic[i] - numeric[i]) / scale > 1e-5) {
        detail = "gradient mismatch at parameter " + std::to_string(i);
        return false;
      }
    }
  }

  // Interval bounds contain 100% of sampled forward passes.
  for (int trial = 0; trial < 5; ++trial) {
    const Network net = testing::random_network(rng, 5, {7, 5}, 2, 1.2);
    const LayerBounds lb = propagate(net, unit_box(5));
    for (int i = 0; i < 10000; ++i) {
      Vector x(5);
      for (auto& v : x) v = rng.uniform();
      Vector cur = x;
      for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const DenseLayer& l = net.layers[li];
        Vector pre(l.output_width());
        for (std::size_t r = 0; r < l.output_width(); ++r) {
          double acc = l.bias[r];
          for (std::size_t c = 0; c < l.weights.cols; ++c) {
            acc += l.weights.at(r, c) * cur[c];
          }
          pre[r] = acc;
        }
        if (!lb.pre[li].contains(pre, 1e-9)) {
          detail = "bounds violated at layer " + std::to_string(li);
          return false;
        }
        cur = pre;
        if (l.activation == Activation::ReLU) {
          for (auto& v : cur) v = std::max(v, 0.0);
        }
      }
    }
  }

  // Simplex vs basic-feasible-solution enumeration within 1e-8.
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(5);
    const std::size_t m = 1 + rng.uniform_index(4);
    LpProblem lp;
    for (std::size_t i = 0; i < m; ++i) {
      Vector row(n);
      for (auto& v : row) v = rng.uniform(-1.0, 1.0);
      lp.rows.push_back(std::move(row));
      lp.rhs.push_back(rng.uniform(0.2, 2.0));
    }
    for (std::size_t j = 0; j < n; ++j) {
      Vector row(n, 0.0);
      row[j] = 1.0;
      lp.rows.push_back(std::move(row));
      lp.rhs.push_back(rng.uniform(0.5, 3.0));
    }
    lp.objective.resize(n);
    for (auto& v : lp.objective) v = rng.uniform(-1.0, 1.0);
    const LpResult got = solve_lp(lp);
    const auto want = oracle::lp_by_basis_enumeration(lp);
    if (got.status != LpStatus::Optimal || !want) {
      detail = "lp not solved on trial " + std::to_string(trial);
      return false;
    }
    if (std::abs(got.objective - *want) > 1e-8) {
      detail = "lp objective off by " + std::to_string(got.objective - *want);
      return false;
    }
  }
  detail = "gradients, interval bounds, and simplex all within tolerance";
  return true;
}

// -------------------------------------------------------------------------
// Criterion 8: CLI determinism with fixed seeds and --workers 1.
// -------------------------------------------------------------------------
bool cli_determinism(std::string& detail) {
  const fs::path dir =
      fs::temp_directory_path() / ("kfair_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto at = [&](const std::string& name) { return (dir / name).string(); };

  auto compare = [&](const std::string& a, const std::string& b) {
    const json ja = strip_timing(json::parse(read_text_file(a)));
    const json jb = strip_timing(json::parse(read_text_file(b)));
    return ja.dump() == jb.dump();
  };

  // plant (twice, byte-identical fixtures incl. csv)
  if (run_cli("plant --k 6 --target-k 5 --rows 250 --seed 9 --out-dir " +
              at("fx1")) != 0 ||
      run_cli("plant --k 6 --target-k 5 --rows 250 --seed 9 --out-dir " +
              at("fx2")) != 0) {
    detail = "plant failed";
    return false;
  }
  if (read_text_file(at("fx1") + "/data.csv") !=
      read_text_file(at("fx2") + "/data.csv")) {
    detail = "plant csv differs across runs";
    return false;
  }

  const std::string model = at("fx1") + "/model.json";
  const std::string schema = at("fx1") + "/schema.json";
  const std::string data = at("fx1") + "/data.csv";

  // certify
  for (const char* out : {"c1.json", "c2.json"}) {
    if (run_cli("certify --model " + model + " --schema " + schema +
                " --timeout 60 --workers 1 --seed 4 --out " + at(out)) != 10) {
      detail = "certify did not return the unfair exit code";
      return false;
    }
  }
  if (!compare(at("c1.json"), at("c2.json"))) {
    detail = "certify reports differ";
    return false;
  }

  // search
  const std::string search_args =
      "search --model " + model + " --schema " + schema + " --data " + data +
      " --strategy sa --seed 21 --max-iters 600 --timeout 120 " +
      "--solver-timeout 30 --workers 1 --out ";
  if (run_cli(search_args + at("s1.json")) != 0 ||
      run_cli(search_args + at("s2.json")) != 0 ||
      !compare(at("s1.json"), at("s2.json"))) {
    detail = "search reports differ";
    return false;
  }

  // explain
  const std::string explain_args =
      "explain --model " + model + " --schema " + schema + " --report " +
      at("s1.json") + " --samples 1200 --min-leaf 10 --seed 13 --workers 1 --out ";
  if (run_cli(explain_args + at("e1.json")) != 0 ||
      run_cli(explain_args + at("e2.json")) != 0 ||
      !compare(at("e1.json"), at("e2.json"))) {
    detail = "explain reports differ";
    return false;
  }

  // mitigate
  for (const char* sub : {"m1", "m2"}) {
    fs::create_directories(dir / sub);
    if (run_cli("mitigate --model " + model + " --schema " + schema +
                " --data " + data + " --explanation " + at("e1.json") +
                " --report " + at("s1.json") +
                " --seed 6 --search-max-iters 800 --epochs 2 --workers 1 " +
                "--search-no-solver " +
                "--out-dir " + at(sub)) != 0) {
      detail = "mitigate failed";
      return false;
    }
  }
  if (!compare(at("m1") + "/mitigation_report.json",
               at("m2") + "/mitigation_report.json")) {
    detail = "mitigation reports differ";
    return false;
  }
  if (read_text_file(at("m1") + "/debiased_model.json") !=
      read_text_file(at("m2") + "/debiased_model.json")) {
    detail = "debiased models differ";
    return false;
  }

  fs::remove_all(dir);
  detail = "plant/certify/search/explain/mitigate byte-identical (timing stripped)";
  return true;
}

}  // namespace

int main() {
  Harness h;
  std::cout << "kfair acceptance suite" << std::endl;
  h.criterion("milp-optimality-oracle", milp_optimality);
  h.criterion("certification-soundness", certification_soundness);
  h.criterion("counterexample-validity", counterexample_validity);
  h.criterion("planted-max-k-recovery", planted_recovery);
  h.criterion("explanation-fidelity", explanation_fidelity);
  h.criterion("mitigation-effect", mitigation_effect);
  h.criterion("numerical-kernels", numerical_kernels);
  h.criterion("cli-determinism", cli_determinism);
  if (h.failures == 0) {
    std::cout << "all criteria passed" << std::endl;
  } else {
    std::cout << h.failures << " criteria failed" << std::endl;
  }
  return h.failures;
}
