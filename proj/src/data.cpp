#include "kfair/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kfair/errors.hpp"
#include "kfair/rng.hpp"

namespace kfair {

namespace {

/// One CSV record, honoring double quotes ("" escapes a quote).
std::vector<std::string> split_csv_line(const std::string& line,
                                        std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  if (quoted) {
    throw InputError("line " + std::to_string(line_no) + ": unterminated quote");
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

FeatureValue parse_cell(const FeatureSpec& spec, const std::string& raw,
                        std::size_t line_no) {
  const std::string cell = trim(raw);
  const std::string where =
      "line " + std::to_string(line_no) + ", feature \"" + spec.name + "\"";
  if (spec.numeric()) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(cell, &pos);
      if (pos != cell.size()) throw std::invalid_argument(cell);
      return v;
    } catch (const std::exception&) {
      throw InputError(where + ": cannot parse \"" + cell + "\" as a number");
    }
  }
  const auto& labels = spec.cat().labels;
  const auto it = std::find(labels.begin(), labels.end(), cell);
  if (it == labels.end()) {
    throw InputError(where + ": \"" + cell + "\" is not a declared label");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

}  // namespace

Dataset parse_csv(const std::string& text, const FeatureSchema& schema) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("csv: empty file");

  const std::vector<std::string> header = split_csv_line(line, 1);
  std::vector<int> column_feature(header.size(), -1);
  int label_column = -1;
  std::vector<bool> seen(schema.num_features(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (name == "label") {
      label_column = static_cast<int>(c);
      continue;
    }
    const auto fi = schema.try_feature_index(name);
    if (!fi) throw InputError("csv header: unknown column \"" + name + "\"");
    column_feature[c] = static_cast<int>(*fi);
    seen[*fi] = true;
  }
  for (std::size_t i = 0; i < schema.num_features(); ++i) {
    if (!seen[i]) {
      throw InputError("csv header: missing column for feature \"" +
                       schema.feature(i).name + "\"");
    }
  }

  Dataset data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line, line_no);
    if (fields.size() != header.size()) {
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    Instance inst;
    inst.values.resize(schema.num_features());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (column_feature[c] < 0) continue;
      const auto fi = static_cast<std::size_t>(column_feature[c]);
      inst.values[fi] = parse_cell(schema.feature(fi), fields[c], line_no);
    }
    try {
      schema.validate_instance(inst);
    } catch (const SchemaError& e) {
      throw InputError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (label_column >= 0) {
      const std::string cell = trim(fields[label_column]);
      try {
        data.labels.push_back(std::stoul(cell));
      } catch (const std::exception&) {
        throw InputError("line " + std::to_string(line_no) +
                         ": cannot parse label \"" + cell + "\"");
      }
    }
    data.rows.push_back(std::move(inst));
  }
  return data;
}

Dataset load_csv(const std::string& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open csv file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), schema);
}

void save_csv(const Dataset& data, const FeatureSchema& schema,
              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write csv file: " + path);
  for (std::size_t i = 0; i < schema.num_features(); ++i) {
    if (i) out << ",";
    out << schema.feature(i).name;
  }
  if (data.has_labels()) out << ",label";
  out << "\n";
  out.precision(17);
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    for (std::size_t i = 0; i < schema.num_features(); ++i) {
      if (i) out << ",";
      out << schema.value_to_string(i, data.rows[r].values[i]);
    }
    if (data.has_labels()) out << "," << data.labels[r];
    out << "\n";
  }
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             double fraction,
                                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InputError("split fraction must be in (0, 1)");
  }
  std::vector<std::size_t> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(split_seed(seed, 0x5417));
  rng.shuffle(idx);
  const auto take = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(data.size())));
  if (take == 0 || take == data.size()) {
    throw InputError("split leaves an empty partition");
  }
  Dataset a, b;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    Dataset& dst = i < take ? a : b;
    dst.rows.push_back(data.rows[idx[i]]);
    if (data.has_labels()) dst.labels.push_back(data.labels[idx[i]]);
  }
  return {std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------
// Planted networks
// ---------------------------------------------------------------------------

namespace {

double logit_of(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

Network make_planted_network(const FeatureSchema& schema,
                             const PlantSpec& plant) {
  // Stage 0 is the base region/offsets; extra stages nest inside it.
  std::vector<PlantStage> stages;
  stages.push_back({plant.region, plant.offsets});
  for (const PlantStage& s : plant.extra_stages) stages.push_back(s);

  const double w = plant.ramp_width;
  if (!(w > 0.0)) throw InputError("plant: ramp width must be positive");
  if (!(plant.base_score > 1e-4 && plant.base_score < 1.0 - 1e-4)) {
    throw InputError("plant: base score must stay strictly inside (0, 1)");
  }
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const PlantStage& stage = stages[s];
    if (stage.offsets.size() != schema.K()) {
      throw InputError("plant: stage " + std::to_string(s) + " offsets size " +
                       std::to_string(stage.offsets.size()) + " != K = " +
                       std::to_string(schema.K()));
    }
    if (stage.region.empty()) throw InputError("plant: empty region");
    for (std::size_t i = 0; i < stage.region.size(); ++i) {
      const PlantRegion& r = stage.region[i];
      if (r.feature >= schema.num_features() ||
          schema.feature(r.feature).is_protected ||
          !schema.feature(r.feature).numeric()) {
        throw InputError("plant: region features must be non-protected numeric");
      }
      if (!(r.lower - w >= 0.0 && r.upper + w <= 1.0 && r.lower < r.upper)) {
        throw InputError("plant: region [" + std::to_string(r.lower) + ", " +
                         std::to_string(r.upper) +
                         "] with ramps must fit inside [0, 1]");
      }
      if (s > 0) {
        // Nesting with ramp margin: the inner gate's ramps must lie inside
        // the enclosing stage's plateau.
        const auto& outer = stages[s - 1].region;
        if (i >= outer.size() || outer[i].feature != r.feature ||
            r.lower - w < outer[i].lower || r.upper + w > outer[i].upper) {
          throw InputError("plant: stage " + std::to_string(s) +
                           " must nest inside stage " + std::to_string(s - 1) +
                           " with ramp margins");
        }
      }
    }
    for (double off : stage.offsets) {
      const double v = plant.base_score + off;
      if (!(v > 1e-4 && v < 1.0 - 1e-4)) {
        throw InputError("plant: scores must stay strictly inside (0, 1)");
      }
    }
  }
  for (std::size_t fi : schema.protected_indices()) {
    if (schema.feature(fi).numeric()) {
      throw InputError(
          "plant: protected features must be categorical (one-hot detectors)");
    }
  }

  const std::size_t width = schema.encoded_width();
  const std::size_t K = schema.K();
  const std::size_t S = stages.size();
  const std::size_t d = plant.region.size();
  const std::size_t m = schema.protected_indices().size();

  // Layer 1: per stage, four boundary-ramp ReLUs per region dimension; then
  // one combination detector per protected combo.
  const std::size_t l1_width = 4 * d * S + K;
  DenseLayer l1;
  l1.activation = Activation::ReLU;
  l1.weights = Matrix(l1_width, width);
  l1.bias.assign(l1_width, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t i = 0; i < d; ++i) {
      const PlantRegion& r = stages[s].region[i];
      const std::size_t coord = schema.offset(r.feature);
      const double thresholds[4] = {r.lower - w, r.lower, r.upper, r.upper + w};
      for (int t = 0; t < 4; ++t) {
        l1.weights.at(4 * (s * d + i) + t, coord) = 1.0;
        l1.bias[4 * (s * d + i) + t] = -thresholds[t];
      }
    }
  }
  for (std::size_t c = 0; c < K; ++c) {
    const std::size_t row = 4 * d * S + c;
    for (const auto& [coord, value] : schema.protected_combos()[c].encoded) {
      if (value != 0.0) l1.weights.at(row, coord) = 1.0;
    }
    l1.bias[row] = -(static_cast<double>(m) - 1.0);
  }

  // Layer 2: one region gate per stage (AND over its dimensions), plus
  // pass-through of the combo detectors (ReLU is exact on them).
  const std::size_t l2_width = S + K;
  DenseLayer l2;
  l2.activation = Activation::ReLU;
  l2.weights = Matrix(l2_width, l1_width);
  l2.bias.assign(l2_width, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t i = 0; i < d; ++i) {
      // gate dimension i of stage s: (r0 - r1 - r2 + r3) / w
      const std::size_t base = 4 * (s * d + i);
      l2.weights.at(s, base + 0) = 1.0 / w;
      l2.weights.at(s, base + 1) = -1.0 / w;
      l2.weights.at(s, base + 2) = -1.0 / w;
      l2.weights.at(s, base + 3) = 1.0 / w;
    }
    l2.bias[s] = -(static_cast<double>(d) - 1.0);
  }
  for (std::size_t c = 0; c < K; ++c) {
    l2.weights.at(S + c, 4 * d * S + c) = 1.0;
  }

  // Layer 3: per stage and combo, A_{s,c} = relu(gate_s + detector_c - 1).
  DenseLayer l3;
  l3.activation = Activation::ReLU;
  l3.weights = Matrix(S * K, l2_width);
  l3.bias.assign(S * K, -1.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t c = 0; c < K; ++c) {
      l3.weights.at(s * K + c, s) = 1.0;
      l3.weights.at(s * K + c, S + c) = 1.0;
    }
  }

  // Output: logit(base) plus, per stage, the logit increment from the
  // enclosing stage's score to this stage's score for the active combo.
  DenseLayer l4;
  l4.activation = Activation::Identity;
  l4.weights = Matrix(1, S * K);
  l4.bias.assign(1, logit_of(plant.base_score));
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t c = 0; c < K; ++c) {
      const double inner = plant.base_score + stages[s].offsets[c];
      const double outer =
          s == 0 ? plant.base_score : plant.base_score + stages[s - 1].offsets[c];
      l4.weights.at(0, s * K + c) = logit_of(inner) - logit_of(outer);
    }
  }

  Network net;
  net.input_width = width;
  net.output_width = 1;
  net.favorable_output_index = 0;
  net.layers = {std::move(l1), std::move(l2), std::move(l3), std::move(l4)};
  validate_network(net);
  return net;
}

bool inside_plant_stage(const FeatureSchema& schema, const PlantSpec& plant,
                        std::size_t stage, const Instance& inst) {
  const std::vector<PlantRegion>& region =
      stage == 0 ? plant.region : plant.extra_stages.at(stage - 1).region;
  const Vector e = schema.encode(inst);
  for (const PlantRegion& r : region) {
    const double v = e[schema.offset(r.feature)];
    if (v < r.lower || v > r.upper) return false;
  }
  return true;
}

bool inside_plant_region(const FeatureSchema& schema, const PlantSpec& plant,
                         const Instance& inst) {
  return inside_plant_stage(schema, plant, 0, inst);
}

Dataset sample_labeled_dataset(const FeatureSchema& schema, const Network& net,
                               std::size_t n, std::uint64_t seed) {
  Rng rng(split_seed(seed, 0xda7a));
  Dataset data;
  data.rows.reserve(n);
  data.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Instance inst = schema.random_instance(rng);
    data.labels.push_back(predict_label(net, schema.encode(inst)));
    data.rows.push_back(std::move(inst));
  }
  return data;
}

}  // namespace kfair
