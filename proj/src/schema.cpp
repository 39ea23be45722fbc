#include "kfair/schema.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kfair/errors.hpp"
#include "kfair/rng.hpp"
#include "json.hpp"

namespace kfair {

namespace {

constexpr std::size_t kMaxProtectedCombos = 4096;
constexpr int kRandomInstanceMaxTries = 10000;

bool values_equal(const FeatureValue& a, const FeatureValue& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<double>(a)) {
    return std::get<double>(a) == std::get<double>(b);
  }
  return std::get<std::size_t>(a) == std::get<std::size_t>(b);
}

/// Domain of a protected feature as an explicit value list.
std::vector<FeatureValue> protected_domain(const FeatureSpec& spec) {
  std::vector<FeatureValue> out;
  if (spec.numeric()) {
    const NumericKind& n = spec.num();
    for (double v = n.lower; v <= n.upper + 1e-9; v += 1.0) {
      out.emplace_back(std::round(v));
    }
  } else {
    for (std::size_t i = 0; i < spec.cat().labels.size(); ++i) {
      out.emplace_back(i);
    }
  }
  return out;
}

}  // namespace

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features,
                             std::vector<ConsistencyRule> rules)
    : features_(std::move(features)), rules_(std::move(rules)) {
  if (features_.empty()) throw SchemaError("schema has no features");

  offsets_.reserve(features_.size());
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const FeatureSpec& f = features_[i];
    if (f.numeric()) {
      if (!(f.num().lower < f.num().upper)) {
        throw SchemaError("feature \"" + f.name +
                          "\": numeric lower must be < upper");
      }
      if (!std::isfinite(f.num().lower) || !std::isfinite(f.num().upper)) {
        throw SchemaError("feature \"" + f.name + "\": non-finite bound");
      }
    } else {
      const auto& labels = f.cat().labels;
      if (labels.size() < 2) {
        throw SchemaError("feature \"" + f.name + "\": needs >= 2 labels");
      }
      for (std::size_t a = 0; a < labels.size(); ++a) {
        for (std::size_t b = a + 1; b < labels.size(); ++b) {
          if (labels[a] == labels[b]) {
            throw SchemaError("feature \"" + f.name + "\": duplicate label \"" +
                              labels[a] + "\"");
          }
        }
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (features_[j].name == f.name) {
        throw SchemaError("duplicate feature name \"" + f.name + "\"");
      }
    }
    offsets_.push_back(encoded_width_);
    encoded_width_ += f.encoded_width();
    if (f.is_protected) {
      if (f.numeric() && !f.num().integral) {
        throw SchemaError("feature \"" + f.name +
                          "\": continuous protected features are not "
                          "supported (K must be finite)");
      }
      if (f.numeric() && f.num().upper - f.num().lower > 64) {
        throw SchemaError("feature \"" + f.name +
                          "\": protected integral domain too large");
      }
      protected_indices_.push_back(i);
    } else {
      non_protected_indices_.push_back(i);
    }
  }
  if (protected_indices_.empty()) {
    throw SchemaError("schema declares no protected feature");
  }

  // Consistency rules may only name protected features: K must be a
  // schema-level constant, independent of any concrete instance.
  for (const ConsistencyRule& rule : rules_) {
    if (rule.atoms.empty()) throw SchemaError("empty consistency rule");
    for (const auto& [fi, value] : rule.atoms) {
      if (!features_[fi].is_protected) {
        throw SchemaError("consistency rule names non-protected feature \"" +
                          features_[fi].name + "\"");
      }
      (void)value;
    }
  }

  // Enumerate the protected combination space, lexicographic over
  // declaration order, dropping combos hit by a forbidden rule.
  std::vector<std::vector<FeatureValue>> domains;
  std::size_t total = 1;
  for (std::size_t fi : protected_indices_) {
    domains.push_back(protected_domain(features_[fi]));
    total *= domains.back().size();
    if (total > kMaxProtectedCombos) {
      throw SchemaError("protected combination space exceeds " +
                        std::to_string(kMaxProtectedCombos));
    }
  }
  std::vector<FeatureValue> probe(features_.size());
  std::vector<std::size_t> cursor(domains.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    // Decode n into mixed-radix digits, first protected feature slowest.
    std::size_t rem = n;
    for (std::size_t d = domains.size(); d-- > 0;) {
      cursor[d] = rem % domains[d].size();
      rem /= domains[d].size();
    }
    ProtectedCombo combo;
    for (std::size_t d = 0; d < domains.size(); ++d) {
      combo.values.push_back(domains[d][cursor[d]]);
      probe[protected_indices_[d]] = combo.values.back();
    }
    bool forbidden = false;
    for (const ConsistencyRule& rule : rules_) {
      bool match = true;
      for (const auto& [fi, value] : rule.atoms) {
        if (!values_equal(probe[fi], value)) {
          match = false;
          break;
        }
      }
      if (match) {
        forbidden = true;
        break;
      }
    }
    if (forbidden) continue;
    // Cache the encoded form of the combo's coordinates.
    for (std::size_t d = 0; d < domains.size(); ++d) {
      const std::size_t fi = protected_indices_[d];
      const FeatureSpec& f = features_[fi];
      const std::size_t off = offsets_[fi];
      if (f.numeric()) {
        const NumericKind& nk = f.num();
        const double v = std::get<double>(combo.values[d]);
        combo.encoded.emplace_back(off, (v - nk.lower) / (nk.upper - nk.lower));
      } else {
        const std::size_t chosen = std::get<std::size_t>(combo.values[d]);
        for (std::size_t c = 0; c < f.cat().labels.size(); ++c) {
          combo.encoded.emplace_back(off + c, c == chosen ? 1.0 : 0.0);
        }
      }
    }
    combos_.push_back(std::move(combo));
  }
  if (combos_.size() < 2) {
    throw SchemaError("protected combination count K = " +
                      std::to_string(combos_.size()) +
                      " after filtering; need K >= 2");
  }
}

std::size_t FeatureSchema::feature_index(const std::string& name) const {
  auto idx = try_feature_index(name);
  if (!idx) throw SchemaError("unknown feature \"" + name + "\"");
  return *idx;
}

std::optional<std::size_t> FeatureSchema::try_feature_index(
    const std::string& name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return i;
  }
  return std::nullopt;
}

bool FeatureSchema::violates_rule(
    const std::vector<FeatureValue>& all_values) const {
  for (const ConsistencyRule& rule : rules_) {
    bool match = true;
    for (const auto& [fi, value] : rule.atoms) {
      if (!values_equal(all_values[fi], value)) {
        match = false;
        break;
      }
    }
    if (match) return true;
  }
  return false;
}

void FeatureSchema::validate_instance(const Instance& inst) const {
  if (inst.values.size() != features_.size()) {
    throw SchemaError("instance has " + std::to_string(inst.values.size()) +
                      " values, schema has " +
                      std::to_string(features_.size()) + " features");
  }
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const FeatureSpec& f = features_[i];
    if (f.numeric()) {
      if (!std::holds_alternative<double>(inst.values[i])) {
        throw SchemaError("feature \"" + f.name + "\": expected a number");
      }
      const double v = std::get<double>(inst.values[i]);
      if (!std::isfinite(v) || v < f.num().lower || v > f.num().upper) {
        throw SchemaError("feature \"" + f.name + "\": value " +
                          std::to_string(v) + " outside [" +
                          std::to_string(f.num().lower) + ", " +
                          std::to_string(f.num().upper) + "]");
      }
      if (f.num().integral && std::abs(v - std::round(v)) > 1e-9) {
        throw SchemaError("feature \"" + f.name + "\": value " +
                          std::to_string(v) + " is not integral");
      }
    } else {
      if (!std::holds_alternative<std::size_t>(inst.values[i])) {
        throw SchemaError("feature \"" + f.name + "\": expected a label");
      }
      const std::size_t c = std::get<std::size_t>(inst.values[i]);
      if (c >= f.cat().labels.size()) {
        throw SchemaError("feature \"" + f.name + "\": label index " +
                          std::to_string(c) + " out of range");
      }
    }
  }
  if (violates_rule(inst.values)) {
    throw SchemaError("instance violates a consistency rule");
  }
}

Vector FeatureSchema::encode(const Instance& inst) const {
  validate_instance(inst);
  Vector out(encoded_width_, 0.0);
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const FeatureSpec& f = features_[i];
    const std::size_t off = offsets_[i];
    if (f.numeric()) {
      const NumericKind& n = f.num();
      double v = std::get<double>(inst.values[i]);
      if (n.integral) v = std::round(v);
      out[off] = (v - n.lower) / (n.upper - n.lower);
    } else {
      out[off + std::get<std::size_t>(inst.values[i])] = 1.0;
    }
  }
  return out;
}

Instance FeatureSchema::decode(const Vector& encoded) const {
  if (encoded.size() != encoded_width_) {
    throw SchemaError("decode: vector length " +
                      std::to_string(encoded.size()) + " != encoded width " +
                      std::to_string(encoded_width_));
  }
  Instance inst;
  inst.values.resize(features_.size());
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const FeatureSpec& f = features_[i];
    const std::size_t off = offsets_[i];
    if (f.numeric()) {
      const NumericKind& n = f.num();
      const double e = std::clamp(encoded[off], 0.0, 1.0);
      double v = n.lower + e * (n.upper - n.lower);
      if (n.integral) v = std::clamp(std::round(v), n.lower, n.upper);
      inst.values[i] = v;
    } else {
      std::size_t best = 0;
      for (std::size_t c = 1; c < f.cat().labels.size(); ++c) {
        if (encoded[off + c] > encoded[off + best]) best = c;
      }
      inst.values[i] = best;
    }
  }
  return inst;
}

void FeatureSchema::apply_combo(Vector& encoded, std::size_t combo) const {
  for (const auto& [coord, value] : combos_[combo].encoded) {
    encoded[coord] = value;
  }
}

std::size_t FeatureSchema::combo_index_of(const Instance& inst) const {
  for (std::size_t k = 0; k < combos_.size(); ++k) {
    bool match = true;
    for (std::size_t d = 0; d < protected_indices_.size(); ++d) {
      if (!values_equal(inst.values[protected_indices_[d]],
                        combos_[k].values[d])) {
        match = false;
        break;
      }
    }
    if (match) return k;
  }
  throw SchemaError("instance's protected values match no valid combination");
}

std::vector<Instance> FeatureSchema::enumerate_counterfactuals(
    const Instance& inst) const {
  validate_instance(inst);
  std::vector<Instance> out;
  out.reserve(combos_.size());
  for (const ProtectedCombo& combo : combos_) {
    Instance cf = inst;
    for (std::size_t d = 0; d < protected_indices_.size(); ++d) {
      cf.values[protected_indices_[d]] = combo.values[d];
    }
    out.push_back(std::move(cf));
  }
  if (out.empty()) throw SchemaError("no valid protected combination");
  return out;
}

Instance FeatureSchema::random_instance(Rng& rng) const {
  for (int attempt = 0; attempt < kRandomInstanceMaxTries; ++attempt) {
    Instance inst;
    inst.values.resize(features_.size());
    for (std::size_t i = 0; i < features_.size(); ++i) {
      const FeatureSpec& f = features_[i];
      if (f.numeric()) {
        const NumericKind& n = f.num();
        if (n.integral) {
          const auto span =
              static_cast<std::size_t>(std::round(n.upper - n.lower)) + 1;
          inst.values[i] = n.lower + static_cast<double>(rng.uniform_index(span));
        } else {
          inst.values[i] = rng.uniform(n.lower, n.upper);
        }
      } else {
        inst.values[i] = rng.uniform_index(f.cat().labels.size());
      }
    }
    if (!violates_rule(inst.values)) return inst;
  }
  throw SchemaError("random_instance: rejection sampling exceeded " +
                    std::to_string(kRandomInstanceMaxTries) + " tries");
}

std::string FeatureSchema::value_to_string(std::size_t feature,
                                           const FeatureValue& v) const {
  const FeatureSpec& f = features_[feature];
  if (f.numeric()) {
    const double x = std::get<double>(v);
    if (f.num().integral || x == std::round(x)) {
      return std::to_string(static_cast<long long>(std::llround(x)));
    }
    std::ostringstream ss;
    ss.precision(17);  // exact double round-trip
    ss << x;
    return ss.str();
  }
  return f.cat().labels[std::get<std::size_t>(v)];
}

namespace {

FeatureValue parse_rule_value(const FeatureSpec& spec, const nlohmann::json& v) {
  if (spec.numeric()) {
    if (!v.is_number()) {
      throw SchemaError("rule value for numeric feature \"" + spec.name +
                        "\" must be a number");
    }
    return v.get<double>();
  }
  const std::string label = v.get<std::string>();
  const auto& labels = spec.cat().labels;
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw SchemaError("rule value \"" + label +
                      "\" is not a label of feature \"" + spec.name + "\"");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

}  // namespace

FeatureSchema parse_schema_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("schema file is not valid JSON: ") + e.what());
  }

  std::vector<FeatureSpec> features;
  try {
    for (const auto& jf : j.at("features")) {
      FeatureSpec f;
      f.name = jf.at("name").get<std::string>();
      f.is_protected = jf.value("protected", false);
      const std::string kind = jf.at("kind").get<std::string>();
      if (kind == "numeric") {
        NumericKind n;
        n.lower = jf.at("lower").get<double>();
        n.upper = jf.at("upper").get<double>();
        n.integral = jf.value("integral", false);
        f.kind = n;
      } else if (kind == "categorical") {
        CategoricalKind c;
        c.labels = jf.at("values").get<std::vector<std::string>>();
        f.kind = c;
      } else {
        throw InputError("feature \"" + f.name + "\": unknown kind \"" + kind +
                         "\"");
      }
      features.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("schema file: missing or mistyped field: ") +
                     e.what());
  }

  // Rules reference features by name; resolve against the declared list.
  auto find_feature = [&](const std::string& name) -> const FeatureSpec& {
    for (const auto& f : features) {
      if (f.name == name) return f;
    }
    throw SchemaError("consistency rule names unknown feature \"" + name +
                      "\"");
  };
  std::vector<ConsistencyRule> rules;
  if (j.contains("consistency_rules")) {
    for (const auto& jr : j["consistency_rules"]) {
      ConsistencyRule rule;
      for (const auto& atom : jr) {
        const std::string name = atom.at("feature").get<std::string>();
        const FeatureSpec& spec = find_feature(name);
        std::size_t idx = 0;
        while (features[idx].name != name) ++idx;
        rule.atoms.emplace_back(idx, parse_rule_value(spec, atom.at("value")));
      }
      rules.push_back(std::move(rule));
    }
  }
  return FeatureSchema(std::move(features), std::move(rules));
}

FeatureSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schema file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_schema_json(ss.str());
}

std::string schema_to_json(const FeatureSchema& schema) {
  nlohmann::json j;
  j["features"] = nlohmann::json::array();
  for (const FeatureSpec& f : schema.features()) {
    nlohmann::json jf;
    jf["name"] = f.name;
    jf["protected"] = f.is_protected;
    if (f.numeric()) {
      jf["kind"] = "numeric";
      jf["lower"] = f.num().lower;
      jf["upper"] = f.num().upper;
      jf["integral"] = f.num().integral;
    } else {
      jf["kind"] = "categorical";
      jf["values"] = f.cat().labels;
    }
    j["features"].push_back(std::move(jf));
  }
  j["consistency_rules"] = nlohmann::json::array();
  for (const ConsistencyRule& rule : schema.consistency_rules()) {
    auto jr = nlohmann::json::array();
    for (const auto& [fi, value] : rule.atoms) {
      nlohmann::json atom;
      atom["feature"] = schema.feature(fi).name;
      if (schema.feature(fi).numeric()) {
        atom["value"] = std::get<double>(value);
      } else {
        atom["value"] = schema.feature(fi).cat().labels[std::get<std::size_t>(value)];
      }
      jr.push_back(std::move(atom));
    }
    j["consistency_rules"].push_back(std::move(jr));
  }
  return j.dump(2);
}

void save_schema(const FeatureSchema& schema, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write schema file: " + path);
  out << schema_to_json(schema) << "\n";
}

}  // namespace kfair
