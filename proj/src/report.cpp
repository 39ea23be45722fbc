#include "kfair/report.hpp"

#include <fstream>
#include <sstream>

#include "kfair/errors.hpp"

namespace kfair {

using nlohmann::json;

json instance_json(const FeatureSchema& schema, const Instance& inst) {
  json j = json::object();
  for (std::size_t i = 0; i < schema.num_features(); ++i) {
    const FeatureSpec& f = schema.feature(i);
    if (f.numeric()) {
      j[f.name] = std::get<double>(inst.values[i]);
    } else {
      j[f.name] = f.cat().labels[std::get<std::size_t>(inst.values[i])];
    }
  }
  return j;
}

Instance instance_from_json(const FeatureSchema& schema, const json& j) {
  Instance inst;
  inst.values.resize(schema.num_features());
  for (std::size_t i = 0; i < schema.num_features(); ++i) {
    const FeatureSpec& f = schema.feature(i);
    if (!j.contains(f.name)) {
      throw InputError("instance json: missing feature \"" + f.name + "\"");
    }
    if (f.numeric()) {
      inst.values[i] = j.at(f.name).get<double>();
    } else {
      const std::string label = j.at(f.name).get<std::string>();
      const auto& labels = f.cat().labels;
      const auto it = std::find(labels.begin(), labels.end(), label);
      if (it == labels.end()) {
        throw InputError("instance json: \"" + label +
                         "\" is not a label of \"" + f.name + "\"");
      }
      inst.values[i] = static_cast<std::size_t>(it - labels.begin());
    }
  }
  schema.validate_instance(inst);
  return inst;
}

json record_json(const FeatureSchema& schema, const DiscriminationRecord& rec) {
  json j;
  j["instance"] = instance_json(schema, rec.instance);
  json scores = json::array();
  for (const auto& s : rec.counterfactual_scores) {
    if (s.has_value()) {
      scores.push_back(*s);
    } else {
      scores.push_back(nullptr);  // guarded outcome
    }
  }
  j["counterfactual_scores"] = std::move(scores);
  j["bucket_indices"] = rec.bucket_indices;
  j["k_value"] = rec.k_value;
  j["is_id"] = rec.is_id;
  return j;
}

json certificate_json(const FeatureSchema& schema, const Certificate& cert) {
  json j;
  switch (cert.verdict) {
    case Verdict::Fair: j["verdict"] = "fair"; break;
    case Verdict::Unfair: j["verdict"] = "unfair"; break;
    case Verdict::Unknown: j["verdict"] = "unknown"; break;
  }
  j["epsilon"] = cert.epsilon;
  j["epsilon_logit"] = cert.epsilon_logit;
  if (cert.max_logit_gap) {
    j["max_logit_gap"] = *cert.max_logit_gap;
    j["score_gap_bound"] = *cert.max_logit_gap / 4.0;
  }
  if (cert.counterexample) {
    const auto& cex = *cert.counterexample;
    json c;
    c["instance"] = instance_json(schema, cex.instance);
    c["combo_a"] = cex.combo_a;
    c["combo_b"] = cex.combo_b;
    c["score_a"] = cex.score_a;
    c["score_b"] = cex.score_b;
    c["score_gap"] = std::abs(cex.score_a - cex.score_b);
    j["counterexample"] = std::move(c);
  }
  if (!cert.reason.empty()) j["reason"] = cert.reason;
  switch (cert.solve.status) {
    case SolveStatus::Optimal: j["solver_status"] = "optimal"; break;
    case SolveStatus::FeasibleIncumbent:
      j["solver_status"] = "feasible_incumbent";
      break;
    case SolveStatus::Infeasible: j["solver_status"] = "infeasible"; break;
    case SolveStatus::TimedOut: j["solver_status"] = "timed_out"; break;
  }
  if (cert.solve.objective_value) {
    j["solver_objective"] = *cert.solve.objective_value;
  }
  j["solver_stats"] = {
      {"nodes_explored", cert.solve.stats.nodes_explored},
      {"lp_iterations", cert.solve.stats.lp_iterations},
      {"unresolved_nodes", cert.solve.stats.unresolved_nodes},
  };
  j["timing"] = {{"solver_wall_seconds", cert.solve.stats.wall_time_seconds}};
  return j;
}

json search_report_json(const FeatureSchema& schema, const SearchReport& r) {
  json j;
  j["strategy"] = r.strategy;
  j["iterations"] = r.iterations;
  j["max_k"] = r.max_k;
  j["avg_k"] = r.avg_k;
  j["num_id"] = r.num_id;
  j["success_rate"] = r.success_rate;
  j["num_id_max_k"] = r.num_id_max_k;
  j["candidates_generated"] = r.candidates_generated;
  j["solver_queries"] = r.solver_queries;
  j["solver_hits"] = r.solver_hits;
  j["degraded_restarts"] = r.degraded_restarts;
  j["reached_target"] = r.reached_target;
  if (r.iter_first_id) j["iter_first_id"] = *r.iter_first_id;
  if (r.iter_max_k) j["iter_max_k"] = *r.iter_max_k;
  json best = json::array();
  for (const DiscriminationRecord& rec : r.best_instances) {
    best.push_back(record_json(schema, rec));
  }
  j["best_instances"] = std::move(best);
  json ids = json::array();
  for (const auto& [inst, k] : r.ids) {
    ids.push_back({{"instance", instance_json(schema, inst)}, {"k_value", k}});
  }
  j["ids"] = std::move(ids);
  json timing;
  if (r.t_first_id_seconds) timing["t_first_id_seconds"] = *r.t_first_id_seconds;
  if (r.t_max_k_seconds) timing["t_max_k_seconds"] = *r.t_max_k_seconds;
  timing["elapsed_seconds"] = r.elapsed_seconds;
  j["timing"] = std::move(timing);
  return j;
}

json predicate_json(const FeatureSchema& schema,
                    const ExplanationPredicate& pred) {
  json j;
  j["text"] = pred.text;
  j["size"] = pred.size;
  json numeric = json::array();
  for (const NumericAtom& a : pred.numeric) {
    json atom;
    atom["feature"] = schema.feature(a.feature).name;
    if (a.lower) atom["lower"] = *a.lower;
    if (a.upper) atom["upper"] = *a.upper;
    numeric.push_back(std::move(atom));
  }
  json categorical = json::array();
  for (const CategoricalAtom& a : pred.categorical) {
    json atom;
    atom["feature"] = schema.feature(a.feature).name;
    json allowed = json::array();
    const auto& labels = schema.feature(a.feature).cat().labels;
    for (std::size_t c = 0; c < a.allowed.size(); ++c) {
      if (a.allowed[c]) allowed.push_back(labels[c]);
    }
    atom["allowed"] = std::move(allowed);
    categorical.push_back(std::move(atom));
  }
  j["atoms"] = {{"numeric", std::move(numeric)},
                {"categorical", std::move(categorical)}};
  j["coverage_volume"] = pred.coverage_volume;
  if (pred.coverage_raw) j["coverage_raw"] = *pred.coverage_raw;
  j["mean_k_inside"] = pred.mean_k_inside;
  j["mean_k_outside"] = pred.mean_k_outside;
  j["mean_k_diff"] = pred.mean_k_diff;
  j["witness_k"] = pred.witness_k;
  j["pert_k"] = pred.pert_k;
  j["diff"] = pred.robustness_diff;
  return j;
}

ExplanationPredicate predicate_from_json(const FeatureSchema& schema,
                                         const json& j) {
  ExplanationPredicate pred;
  const json& atoms = j.at("atoms");
  for (const json& a : atoms.at("numeric")) {
    NumericAtom atom;
    atom.feature = schema.feature_index(a.at("feature").get<std::string>());
    if (a.contains("lower")) atom.lower = a["lower"].get<double>();
    if (a.contains("upper")) atom.upper = a["upper"].get<double>();
    pred.numeric.push_back(std::move(atom));
  }
  for (const json& a : atoms.at("categorical")) {
    CategoricalAtom atom;
    atom.feature = schema.feature_index(a.at("feature").get<std::string>());
    const FeatureSpec& f = schema.feature(atom.feature);
    atom.allowed.assign(f.cat().labels.size(), false);
    for (const json& label : a.at("allowed")) {
      const std::string name = label.get<std::string>();
      const auto& labels = f.cat().labels;
      const auto it = std::find(labels.begin(), labels.end(), name);
      if (it == labels.end()) {
        throw InputError("predicate json: unknown label \"" + name + "\"");
      }
      atom.allowed[it - labels.begin()] = true;
    }
    pred.categorical.push_back(std::move(atom));
  }
  pred.size = j.value("size", std::size_t{0});
  pred.coverage_volume = j.value("coverage_volume", 1.0);
  pred.mean_k_inside = j.value("mean_k_inside", 0.0);
  pred.mean_k_outside = j.value("mean_k_outside", 0.0);
  pred.mean_k_diff = j.value("mean_k_diff", 0.0);
  pred.text = j.value("text", predicate_text(pred, schema));
  return pred;
}

json explain_json(const FeatureSchema& schema, const ExplainOutcome& outcome) {
  json j;
  j["kappa"] = outcome.kappa;
  j["n_samples"] = outcome.n_samples;
  j["n_high"] = outcome.n_high;
  j["n_low"] = outcome.n_low;
  json preds = json::array();
  for (const ExplanationPredicate& p : outcome.accepted) {
    preds.push_back(predicate_json(schema, p));
  }
  j["predicates"] = std::move(preds);
  j["diagnostics"] = outcome.diagnostics;
  j["timing"] = json::object();
  return j;
}

json mitigation_json(const FeatureSchema& schema,
                     const MitigationReport& report) {
  json j;
  json rows = json::array();
  for (const MitigationRow& row : report.rows) {
    json r;
    r["variant"] = row.variant;
    r["accuracy_percent"] = row.accuracy_percent;
    r["search"] = search_report_json(schema, row.search);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  j["accuracy_delta"] = report.accuracy_delta;
  j["timing"] = json::object();
  return j;
}

json strip_timing(json j) {
  if (j.is_object()) {
    j.erase("timing");
    for (auto& [key, value] : j.items()) {
      (void)key;
      value = strip_timing(value);
    }
  } else if (j.is_array()) {
    for (auto& value : j) value = strip_timing(value);
  }
  return j;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string file_digest_hex(const std::string& path) {
  const std::uint64_t h = fnv1a64(read_text_file(path));
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file: " + path);
  out << content;
}

}  // namespace kfair
