// kfair command line: certify / search / explain / mitigate / plant.
// Exit codes: 0 fair or success, 10 unfair, 20 unknown, 30 degenerate
// explanation, 1 usage or input error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "kfair/data.hpp"
#include "kfair/errors.hpp"
#include "kfair/explain.hpp"
#include "kfair/milp.hpp"
#include "kfair/mitigate.hpp"
#include "kfair/model.hpp"
#include "kfair/report.hpp"
#include "kfair/schema.hpp"
#include "kfair/search.hpp"

namespace {

using nlohmann::json;

int log_level() {
  const char* env = std::getenv("KFAIR_LOG");
  if (!env) return 1;
  const std::string v = env;
  if (v == "quiet" || v == "0") return 0;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[kfair] " << msg << "\n";
}

struct ManifestBuilder {
  json inputs = json::object();
  json config = json::object();
  std::string command;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  void add_input(const std::string& path) {
    inputs[path] = kfair::file_digest_hex(path);
  }

  void write(const std::string& out_path) const {
    json m;
    m["tool_version"] = kfair::kToolVersion;
    m["command"] = command;
    m["config"] = config;
    m["inputs"] = inputs;
    m["timing"] = {
        {"wall_seconds",
         std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
             .count()},
        {"unix_timestamp", static_cast<long long>(std::time(nullptr))},
    };
    kfair::write_text_file(out_path, m.dump(2) + "\n");
  }
};

void write_report(const std::string& path, const json& j) {
  kfair::write_text_file(path, j.dump(2) + "\n");
  log_info("wrote " + path);
}

// Shared flag bundle.
struct CommonArgs {
  std::string model_path;
  std::string schema_path;
  std::string out_path;
  double epsilon = 0.05;
  std::uint64_t seed = 0;
  int workers = 1;
};

std::vector<kfair::Instance> seeds_from_report(const kfair::FeatureSchema& schema,
                                               const std::string& report_path) {
  const json j = json::parse(kfair::read_text_file(report_path));
  std::vector<kfair::Instance> seeds;
  if (j.contains("best_instances")) {
    for (const json& rec : j["best_instances"]) {
      seeds.push_back(kfair::instance_from_json(schema, rec.at("instance")));
    }
  }
  if (seeds.empty()) {
    throw kfair::InputError("search report has no best_instances: " +
                            report_path);
  }
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Individual-fairness certification, k-discrimination search, "
               "explanation and mitigation for small ReLU networks"};
  app.require_subcommand(1);

  // ---- certify ----
  CommonArgs cert_args;
  double cert_timeout = 100.0;
  double cert_tolerance = 1e-4;
  bool cert_no_early_stop = false;
  std::string lp_dump_path;
  auto* cmd_certify = app.add_subcommand("certify", "Certify 2-fairness");
  cmd_certify->add_option("--model", cert_args.model_path)->required();
  cmd_certify->add_option("--schema", cert_args.schema_path)->required();
  cmd_certify->add_option("--out", cert_args.out_path)->required();
  cmd_certify->add_option("--epsilon", cert_args.epsilon);
  cmd_certify->add_option("--timeout", cert_timeout);
  cmd_certify->add_option("--tolerance", cert_tolerance);
  cmd_certify->add_option("--seed", cert_args.seed);
  cmd_certify->add_option("--workers", cert_args.workers);
  cmd_certify->add_flag("--no-early-stop", cert_no_early_stop,
                        "Always solve to optimality");
  cmd_certify->add_option("--lp-dump", lp_dump_path,
                          "Write the MILP in LP text format");

  // ---- search ----
  CommonArgs search_args;
  std::string search_data_path;
  std::string search_strategy = "sa";
  double search_timeout = 14400.0;
  std::uint64_t search_max_iters = 0;
  std::uint64_t search_target_k = 0;
  bool search_no_solver = false;
  double search_solver_timeout = 100.0;
  auto* cmd_search = app.add_subcommand("search", "Maximize k-discrimination");
  cmd_search->add_option("--model", search_args.model_path)->required();
  cmd_search->add_option("--schema", search_args.schema_path)->required();
  cmd_search->add_option("--out", search_args.out_path)->required();
  cmd_search->add_option("--data", search_data_path);
  cmd_search->add_option("--strategy", search_strategy)
      ->check(CLI::IsMember({"rw", "sa", "sa-knn"}));
  cmd_search->add_option("--epsilon", search_args.epsilon);
  cmd_search->add_option("--timeout", search_timeout);
  cmd_search->add_option("--max-iters", search_max_iters,
                         "Deterministic iteration bound (0 = none)");
  cmd_search->add_option("--target-k", search_target_k,
                         "Stop once this k is reached (0 = none)");
  cmd_search->add_option("--seed", search_args.seed);
  cmd_search->add_option("--workers", search_args.workers);
  cmd_search->add_flag("--no-solver", search_no_solver,
                       "Disable MILP re-seeding");
  cmd_search->add_option("--solver-timeout", search_solver_timeout);

  // ---- explain ----
  CommonArgs explain_args;
  std::string explain_report_path;
  kfair::ExplainConfig explain_cfg;
  auto* cmd_explain = app.add_subcommand("explain", "Decision-rule explanations");
  cmd_explain->add_option("--model", explain_args.model_path)->required();
  cmd_explain->add_option("--schema", explain_args.schema_path)->required();
  cmd_explain->add_option("--report", explain_report_path)->required();
  cmd_explain->add_option("--out", explain_args.out_path)->required();
  cmd_explain->add_option("--epsilon", explain_args.epsilon);
  cmd_explain->add_option("--samples", explain_cfg.n_samples);
  cmd_explain->add_option("--percentile", explain_cfg.high_k_percentile);
  cmd_explain->add_option("--delta", explain_cfg.delta);
  cmd_explain->add_option("--depth", explain_cfg.tree_max_depth);
  cmd_explain->add_option("--min-leaf", explain_cfg.tree_min_leaf);
  cmd_explain->add_option("--sigma", explain_cfg.perturb_sigma_fraction);
  cmd_explain->add_option("--flip-prob", explain_cfg.categorical_flip_prob);
  cmd_explain->add_option("--cex-samples", explain_cfg.cex_samples);
  cmd_explain->add_option("--seed", explain_args.seed);
  cmd_explain->add_option("--workers", explain_args.workers);

  // ---- mitigate ----
  CommonArgs mitigate_args;
  std::string mit_data_path, mit_explanation_path, mit_report_path, mit_out_dir;
  bool mit_no_retrain = false;
  bool mit_no_solver = false;
  double mit_split = 0.8;
  double mit_timeout = 60.0;
  std::uint64_t mit_max_iters = 20000;
  kfair::FineTuneConfig mit_ft;
  auto* cmd_mitigate = app.add_subcommand("mitigate", "Guardrails + retraining");
  cmd_mitigate->add_option("--model", mitigate_args.model_path)->required();
  cmd_mitigate->add_option("--schema", mitigate_args.schema_path)->required();
  cmd_mitigate->add_option("--data", mit_data_path)->required();
  cmd_mitigate->add_option("--explanation", mit_explanation_path)->required();
  cmd_mitigate->add_option("--report", mit_report_path,
                           "Search report supplying discriminatory instances");
  cmd_mitigate->add_option("--out-dir", mit_out_dir)->required();
  cmd_mitigate->add_option("--epsilon", mitigate_args.epsilon);
  cmd_mitigate->add_option("--seed", mitigate_args.seed);
  cmd_mitigate->add_option("--workers", mitigate_args.workers);
  cmd_mitigate->add_flag("--no-retrain", mit_no_retrain,
                         "Guards-only comparison (skip fine-tuning)");
  cmd_mitigate->add_flag("--search-no-solver", mit_no_solver,
                         "Disable MILP re-seeding in the evaluation searches");
  cmd_mitigate->add_option("--split", mit_split, "Train fraction");
  cmd_mitigate->add_option("--search-timeout", mit_timeout);
  cmd_mitigate->add_option("--search-max-iters", mit_max_iters);
  cmd_mitigate->add_option("--epochs", mit_ft.epochs);
  cmd_mitigate->add_option("--lr", mit_ft.learning_rate);
  cmd_mitigate->add_option("--batch", mit_ft.batch_size);

  // ---- plant ----
  std::string plant_out_dir;
  std::size_t plant_k = 6;
  std::size_t plant_target_k = 4;
  std::size_t plant_rows = 2000;
  std::uint64_t plant_seed = 0;
  auto* cmd_plant =
      app.add_subcommand("plant", "Generate a synthetic planted fixture");
  cmd_plant->add_option("--k", plant_k, "Protected combination count");
  cmd_plant->add_option("--target-k", plant_target_k, "Ground-truth max k");
  cmd_plant->add_option("--rows", plant_rows);
  cmd_plant->add_option("--seed", plant_seed);
  cmd_plant->add_option("--out-dir", plant_out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors map to 1, --help stays 0
  }

  try {
    if (*cmd_certify) {
      ManifestBuilder manifest;
      manifest.command = "certify";
      manifest.add_input(cert_args.model_path);
      manifest.add_input(cert_args.schema_path);
      const auto net = kfair::load_network(cert_args.model_path);
      const auto schema = kfair::load_schema(cert_args.schema_path);
      kfair::CertifyConfig cfg;
      cfg.solve.timeout_seconds = cert_timeout;
      cfg.solve.tolerance = cert_tolerance;
      cfg.solve.workers = cert_args.workers;
      cfg.stop_at_first_violation = !cert_no_early_stop;
      manifest.config = {{"epsilon", cert_args.epsilon},
                         {"timeout_seconds", cert_timeout},
                         {"tolerance", cert_tolerance},
                         {"workers", cert_args.workers},
                         {"early_stop", !cert_no_early_stop},
                         {"seed", cert_args.seed}};
      if (!lp_dump_path.empty()) {
        const auto box = kfair::unit_box(schema.encoded_width());
        const auto problem = kfair::encode_pair_fairness(
            net, schema, kfair::propagate(net, box), cert_args.epsilon, box);
        kfair::write_text_file(lp_dump_path, kfair::lp_text(problem));
        log_info("wrote " + lp_dump_path);
      }
      const auto cert = kfair::certify(net, schema, cert_args.epsilon, cfg);
      write_report(cert_args.out_path, kfair::certificate_json(schema, cert));
      manifest.write(cert_args.out_path + ".manifest.json");
      switch (cert.verdict) {
        case kfair::Verdict::Fair: return 0;
        case kfair::Verdict::Unfair: return 10;
        case kfair::Verdict::Unknown: return 20;
      }
    }

    if (*cmd_search) {
      ManifestBuilder manifest;
      manifest.command = "search";
      manifest.add_input(search_args.model_path);
      manifest.add_input(search_args.schema_path);
      const auto net = kfair::load_network(search_args.model_path);
      const auto schema = kfair::load_schema(search_args.schema_path);
      kfair::Dataset data;
      if (!search_data_path.empty()) {
        manifest.add_input(search_data_path);
        data = kfair::load_csv(search_data_path, schema);
      }
      kfair::SearchConfig cfg;
      cfg.strategy = *kfair::parse_strategy(search_strategy);
      cfg.epsilon = search_args.epsilon;
      cfg.timeout_seconds = search_timeout;
      if (search_max_iters > 0) cfg.max_iterations = search_max_iters;
      if (search_target_k > 0) cfg.target_k = search_target_k;
      cfg.rng_seed = search_args.seed;
      cfg.use_solver = !search_no_solver;
      cfg.solver_timeout_seconds = search_solver_timeout;
      manifest.config = {{"strategy", search_strategy},
                         {"epsilon", cfg.epsilon},
                         {"timeout_seconds", cfg.timeout_seconds},
                         {"max_iterations", search_max_iters},
                         {"target_k", search_target_k},
                         {"seed", cfg.rng_seed},
                         {"use_solver", cfg.use_solver},
                         {"solver_timeout_seconds", cfg.solver_timeout_seconds},
                         {"workers", search_args.workers}};
      const auto report = kfair::run_search(net, schema, data, cfg);
      write_report(search_args.out_path,
                   kfair::search_report_json(schema, report));
      manifest.write(search_args.out_path + ".manifest.json");
      log_info("max_k=" + std::to_string(report.max_k) +
               " num_id=" + std::to_string(report.num_id));
      return 0;
    }

    if (*cmd_explain) {
      ManifestBuilder manifest;
      manifest.command = "explain";
      manifest.add_input(explain_args.model_path);
      manifest.add_input(explain_args.schema_path);
      manifest.add_input(explain_report_path);
      const auto net = kfair::load_network(explain_args.model_path);
      const auto schema = kfair::load_schema(explain_args.schema_path);
      const auto seeds = seeds_from_report(schema, explain_report_path);
      explain_cfg.epsilon = explain_args.epsilon;
      explain_cfg.rng_seed = explain_args.seed;
      explain_cfg.workers = explain_args.workers;
      manifest.config = {{"n_samples", explain_cfg.n_samples},
                         {"percentile", explain_cfg.high_k_percentile},
                         {"delta", explain_cfg.delta},
                         {"tree_max_depth", explain_cfg.tree_max_depth},
                         {"tree_min_leaf", explain_cfg.tree_min_leaf},
                         {"sigma_fraction", explain_cfg.perturb_sigma_fraction},
                         {"flip_prob", explain_cfg.categorical_flip_prob},
                         {"cex_samples", explain_cfg.cex_samples},
                         {"epsilon", explain_cfg.epsilon},
                         {"seed", explain_cfg.rng_seed},
                         {"workers", explain_cfg.workers}};
      try {
        const auto outcome = kfair::run_explain(net, schema, seeds, explain_cfg);
        write_report(explain_args.out_path, kfair::explain_json(schema, outcome));
        manifest.write(explain_args.out_path + ".manifest.json");
        log_info(std::to_string(outcome.accepted.size()) +
                 " validated predicate(s)");
        return 0;
      } catch (const kfair::DegenerateError& e) {
        json j;
        j["error"] = "degenerate_k_distribution";
        j["detail"] = e.what();
        write_report(explain_args.out_path, j);
        manifest.write(explain_args.out_path + ".manifest.json");
        std::cerr << "kfair explain: " << e.what() << "\n";
        return 30;
      }
    }

    if (*cmd_mitigate) {
      ManifestBuilder manifest;
      manifest.command = "mitigate";
      manifest.add_input(mitigate_args.model_path);
      manifest.add_input(mitigate_args.schema_path);
      manifest.add_input(mit_data_path);
      manifest.add_input(mit_explanation_path);
      const auto net = kfair::load_network(mitigate_args.model_path);
      const auto schema = kfair::load_schema(mitigate_args.schema_path);
      const auto data = kfair::load_csv(mit_data_path, schema);

      const json ej = json::parse(kfair::read_text_file(mit_explanation_path));
      std::vector<kfair::ExplanationPredicate> guards;
      for (const json& p : ej.at("predicates")) {
        guards.push_back(kfair::predicate_from_json(schema, p));
      }

      auto [train, holdout] =
          kfair::train_test_split(data, mit_split, mitigate_args.seed);

      std::optional<kfair::Network> debiased;
      if (!mit_no_retrain) {
        std::vector<kfair::DiscriminationRecord> records;
        if (!mit_report_path.empty()) {
          manifest.add_input(mit_report_path);
          for (const auto& seed :
               seeds_from_report(schema, mit_report_path)) {
            kfair::DiscriminationRecord rec;
            rec.instance = seed;
            records.push_back(std::move(rec));
          }
        }
        const auto augmented =
            kfair::augment_dataset(train, records, schema, net);
        mit_ft.rng_seed = mitigate_args.seed;
        debiased = kfair::fine_tune(net, augmented, schema, mit_ft);
        kfair::save_network(*debiased, mit_out_dir + "/debiased_model.json");
        log_info("wrote " + mit_out_dir + "/debiased_model.json");
      }

      kfair::MitigateConfig cfg;
      cfg.search.epsilon = mitigate_args.epsilon;
      cfg.search.timeout_seconds = mit_timeout;
      if (mit_max_iters > 0) cfg.search.max_iterations = mit_max_iters;
      cfg.search.rng_seed = mitigate_args.seed;
      cfg.search.use_solver = !mit_no_solver;
      cfg.fine_tune = mit_ft;
      cfg.retrain = !mit_no_retrain;
      manifest.config = {{"epsilon", mitigate_args.epsilon},
                         {"seed", mitigate_args.seed},
                         {"split", mit_split},
                         {"search_timeout", mit_timeout},
                         {"search_max_iters", mit_max_iters},
                         {"retrain", !mit_no_retrain},
                         {"epochs", mit_ft.epochs},
                         {"learning_rate", mit_ft.learning_rate},
                         {"batch_size", mit_ft.batch_size}};

      const auto report = kfair::evaluate_mitigation(
          net, debiased, guards, schema, train, holdout, cfg);

      json gj;
      gj["predicates"] = json::array();
      for (const auto& g : guards) {
        gj["predicates"].push_back(kfair::predicate_json(schema, g));
      }
      write_report(mit_out_dir + "/guards.json", gj);
      write_report(mit_out_dir + "/mitigation_report.json",
                   kfair::mitigation_json(schema, report));
      manifest.write(mit_out_dir + "/manifest.json");
      return 0;
    }

    if (*cmd_plant) {
      ManifestBuilder manifest;
      manifest.command = "plant";
      std::filesystem::create_directories(plant_out_dir);
      kfair::CategoricalKind kind;
      for (std::size_t i = 0; i < plant_k; ++i) {
        kind.labels.push_back("g" + std::to_string(i));
      }
      std::vector<kfair::FeatureSpec> specs = {
          {"x0", kfair::NumericKind{0.0, 100.0, false}, false},
          {"x1", kfair::NumericKind{0.0, 1.0, false}, false},
          {"group", kind, true},
      };
      kfair::FeatureSchema schema(specs, {});
      kfair::PlantSpec plant;
      plant.region = {{0, 0.3, 0.7}, {1, 0.3, 0.7}};
      for (std::size_t c = 0; c < plant_k; ++c) {
        const std::size_t bucket = c < plant_target_k ? c : plant_target_k - 1;
        plant.offsets.push_back(0.05 * static_cast<double>(bucket));
      }
      const auto net = kfair::make_planted_network(schema, plant);
      const auto data =
          kfair::sample_labeled_dataset(schema, net, plant_rows, plant_seed);
      kfair::save_schema(schema, plant_out_dir + "/schema.json");
      kfair::save_network(net, plant_out_dir + "/model.json");
      kfair::save_csv(data, schema, plant_out_dir + "/data.csv");
      json truth;
      truth["target_k"] = plant_target_k;
      truth["base_score"] = plant.base_score;
      truth["offsets"] = plant.offsets;
      truth["region"] = json::array();
      for (const auto& r : plant.region) {
        truth["region"].push_back({{"feature", schema.feature(r.feature).name},
                                   {"lower_encoded", r.lower},
                                   {"upper_encoded", r.upper}});
      }
      write_report(plant_out_dir + "/ground_truth.json", truth);
      manifest.config = {{"k", plant_k},
                         {"target_k", plant_target_k},
                         {"rows", plant_rows},
                         {"seed", plant_seed}};
      manifest.write(plant_out_dir + "/manifest.json");
      return 0;
    }
  } catch (const kfair::Error& e) {
    std::cerr << "kfair: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "kfair: unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
