// Python bindings for the core operations. Reports cross the boundary as
// JSON strings; the kfair python package decodes them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "kfair/cluster.hpp"
#include "kfair/data.hpp"
#include "kfair/explain.hpp"
#include "kfair/milp.hpp"
#include "kfair/model.hpp"
#include "kfair/report.hpp"
#include "kfair/schema.hpp"
#include "kfair/search.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

json parse_config(const std::string& text) {
  if (text.empty()) return json::object();
  return json::parse(text);
}

kfair::SearchConfig search_config_from_json(const json& j) {
  kfair::SearchConfig cfg;
  if (j.contains("strategy")) {
    const auto s = kfair::parse_strategy(j["strategy"].get<std::string>());
    if (!s) throw kfair::InputError("unknown strategy");
    cfg.strategy = *s;
  }
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.timeout_seconds = j.value("timeout_seconds", cfg.timeout_seconds);
  if (j.contains("max_iterations")) {
    cfg.max_iterations = j["max_iterations"].get<std::uint64_t>();
  }
  cfg.p_exploit = j.value("p_exploit", cfg.p_exploit);
  cfg.rng_seed = j.value("seed", cfg.rng_seed);
  if (j.contains("target_k")) cfg.target_k = j["target_k"].get<std::size_t>();
  cfg.use_solver = j.value("use_solver", cfg.use_solver);
  cfg.solver_timeout_seconds =
      j.value("solver_timeout_seconds", cfg.solver_timeout_seconds);
  return cfg;
}

kfair::ExplainConfig explain_config_from_json(const json& j) {
  kfair::ExplainConfig cfg;
  cfg.n_samples = j.value("n_samples", cfg.n_samples);
  cfg.high_k_percentile = j.value("percentile", cfg.high_k_percentile);
  cfg.delta = j.value("delta", cfg.delta);
  cfg.tree_max_depth = j.value("tree_max_depth", cfg.tree_max_depth);
  cfg.tree_min_leaf = j.value("tree_min_leaf", cfg.tree_min_leaf);
  cfg.perturb_sigma_fraction = j.value("sigma", cfg.perturb_sigma_fraction);
  cfg.categorical_flip_prob = j.value("flip_prob", cfg.categorical_flip_prob);
  cfg.cex_samples = j.value("cex_samples", cfg.cex_samples);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.rng_seed = j.value("seed", cfg.rng_seed);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_kfair, m) {
  m.doc() = "Individual-fairness certification and k-discrimination analysis";
  m.attr("__version__") = kfair::kToolVersion;

  py::register_exception<kfair::Error>(m, "KfairError");

  py::class_<kfair::Network>(m, "Network")
      .def_readonly("input_width", &kfair::Network::input_width)
      .def_readonly("output_width", &kfair::Network::output_width)
      .def("__repr__", [](const kfair::Network& n) {
        return "<kfair.Network " + std::to_string(n.input_width) + "->" +
               std::to_string(n.output_width) + ", " +
               std::to_string(n.layers.size()) + " layers>";
      });

  py::class_<kfair::FeatureSchema>(m, "FeatureSchema")
      .def_property_readonly("K", &kfair::FeatureSchema::K)
      .def_property_readonly("encoded_width",
                             &kfair::FeatureSchema::encoded_width)
      .def("__repr__", [](const kfair::FeatureSchema& s) {
        return "<kfair.FeatureSchema " + std::to_string(s.num_features()) +
               " features, K=" + std::to_string(s.K()) + ">";
      });

  m.def("load_network", &kfair::load_network, py::arg("path"));
  m.def("parse_network", &kfair::parse_network_json, py::arg("text"));
  m.def("load_schema", &kfair::load_schema, py::arg("path"));
  m.def("parse_schema", &kfair::parse_schema_json, py::arg("text"));

  m.def("forward", &kfair::forward, py::arg("network"), py::arg("input"));
  m.def("score", &kfair::score, py::arg("network"), py::arg("input"));
  m.def("predict_label", &kfair::predict_label, py::arg("network"),
        py::arg("input"));

  m.def(
      "k_discrimination",
      [](const kfair::Network& net, const kfair::FeatureSchema& schema,
         const std::string& instance_json, double epsilon) {
        const auto inst =
            kfair::instance_from_json(schema, json::parse(instance_json));
        const auto rec = kfair::k_discrimination(net, schema, inst, epsilon);
        return kfair::record_json(schema, rec).dump();
      },
      py::arg("network"), py::arg("schema"), py::arg("instance_json"),
      py::arg("epsilon") = 0.05);

  m.def(
      "certify",
      [](const kfair::Network& net, const kfair::FeatureSchema& schema,
         double epsilon, double timeout_seconds, bool early_stop) {
        kfair::CertifyConfig cfg;
        cfg.solve.timeout_seconds = timeout_seconds;
        cfg.stop_at_first_violation = early_stop;
        const auto cert = kfair::certify(net, schema, epsilon, cfg);
        return kfair::certificate_json(schema, cert).dump();
      },
      py::arg("network"), py::arg("schema"), py::arg("epsilon") = 0.05,
      py::arg("timeout_seconds") = 100.0, py::arg("early_stop") = true);

  m.def(
      "search",
      [](const kfair::Network& net, const kfair::FeatureSchema& schema,
         const std::string& csv_text, const std::string& config_json) {
        kfair::Dataset data;
        if (!csv_text.empty()) data = kfair::parse_csv(csv_text, schema);
        const auto cfg = search_config_from_json(parse_config(config_json));
        const auto report = kfair::run_search(net, schema, data, cfg);
        return kfair::search_report_json(schema, report).dump();
      },
      py::arg("network"), py::arg("schema"), py::arg("csv_text") = "",
      py::arg("config_json") = "");

  m.def(
      "explain",
      [](const kfair::Network& net, const kfair::FeatureSchema& schema,
         const std::string& seeds_json, const std::string& config_json) {
        std::vector<kfair::Instance> seeds;
        for (const json& s : json::parse(seeds_json)) {
          seeds.push_back(kfair::instance_from_json(schema, s));
        }
        const auto cfg = explain_config_from_json(parse_config(config_json));
        const auto outcome = kfair::run_explain(net, schema, seeds, cfg);
        return kfair::explain_json(schema, outcome).dump();
      },
      py::arg("network"), py::arg("schema"), py::arg("seeds_json"),
      py::arg("config_json") = "");
}
