#include "kfair/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kfair/errors.hpp"
#include "json.hpp"

namespace kfair {

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace

void validate_network(const Network& net) {
  if (net.layers.empty()) throw InputError("network has no layers");
  if (net.favorable_output_index >= net.output_width) {
    throw InputError("favorable_output_index " +
                     std::to_string(net.favorable_output_index) +
                     " out of range for output_width " +
                     std::to_string(net.output_width));
  }
  std::size_t expected_in = net.input_width;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const DenseLayer& l = net.layers[i];
    const std::string where = "layer " + std::to_string(i);
    if (l.weights.rows * l.weights.cols != l.weights.data.size()) {
      throw InputError(where + ": weight storage does not match shape");
    }
    if (l.input_width() != expected_in) {
      throw InputError(where + ": input width " +
                       std::to_string(l.input_width()) + ", expected " +
                       std::to_string(expected_in));
    }
    if (l.bias.size() != l.output_width()) {
      throw InputError(where + ": bias length " + std::to_string(l.bias.size()) +
                       " != output width " + std::to_string(l.output_width()));
    }
    if (!all_finite(l.weights.data) || !all_finite(l.bias)) {
      throw InputError(where + ": non-finite weight or bias entry");
    }
    const bool last = (i + 1 == net.layers.size());
    if (last && l.activation != Activation::Identity) {
      throw InputError(where + ": output layer must use identity activation");
    }
    if (!last && l.activation != Activation::ReLU) {
      throw InputError(where + ": hidden layers must use relu activation");
    }
    expected_in = l.output_width();
  }
  if (expected_in != net.output_width) {
    throw InputError("last layer width " + std::to_string(expected_in) +
                     " != declared output_width " +
                     std::to_string(net.output_width));
  }
}

Vector forward(const Network& net, const Vector& input) {
  if (input.size() != net.input_width) {
    throw InputError("forward: input length " + std::to_string(input.size()) +
                     " != input_width " + std::to_string(net.input_width));
  }
  if (!all_finite(input)) throw InputError("forward: non-finite input entry");

  Vector cur = input;
  Vector next;
  for (const DenseLayer& l : net.layers) {
    next.assign(l.output_width(), 0.0);
    const double* w = l.weights.data.data();
    for (std::size_t r = 0; r < l.output_width(); ++r) {
      double acc = l.bias[r];
      const double* row = w + r * l.weights.cols;
      for (std::size_t c = 0; c < l.weights.cols; ++c) acc += row[c] * cur[c];
      next[r] = (l.activation == Activation::ReLU && acc < 0.0) ? 0.0 : acc;
    }
    cur.swap(next);
  }
  return cur;
}

double score_from_logits(const Network& net, const Vector& logits) {
  if (net.output_width == 1) {
    return 1.0 / (1.0 + std::exp(-logits[0]));
  }
  // Softmax probability of the favorable class, stabilized by the max logit.
  const double m = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double v : logits) denom += std::exp(v - m);
  return std::exp(logits[net.favorable_output_index] - m) / denom;
}

double score(const Network& net, const Vector& input) {
  return score_from_logits(net, forward(net, input));
}

std::size_t label_from_logits(const Network& net, const Vector& logits) {
  if (net.output_width == 1) {
    return score_from_logits(net, logits) > 0.5 ? 1 : 0;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

std::size_t predict_label(const Network& net, const Vector& input) {
  return label_from_logits(net, forward(net, input));
}

namespace {

Activation parse_activation(const std::string& s, std::size_t layer_idx) {
  if (s == "relu") return Activation::ReLU;
  if (s == "identity") return Activation::Identity;
  throw InputError("layer " + std::to_string(layer_idx) +
                   ": unknown activation \"" + s + "\"");
}

}  // namespace

Network parse_network_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("network file is not valid JSON: ") + e.what());
  }
  Network net;
  try {
    net.input_width = j.at("input_width").get<std::size_t>();
    net.output_width = j.at("output_width").get<std::size_t>();
    net.favorable_output_index = j.at("favorable_output_index").get<std::size_t>();
    for (std::size_t i = 0; i < j.at("layers").size(); ++i) {
      const auto& jl = j["layers"][i];
      DenseLayer layer;
      const auto& rows = jl.at("weights");
      layer.weights.rows = rows.size();
      layer.weights.cols = rows.empty() ? 0 : rows[0].size();
      for (const auto& row : rows) {
        if (row.size() != layer.weights.cols) {
          throw InputError("layer " + std::to_string(i) +
                           ": ragged weight rows");
        }
        for (const auto& v : row) layer.weights.data.push_back(v.get<double>());
      }
      layer.bias = jl.at("bias").get<std::vector<double>>();
      layer.activation =
          parse_activation(jl.at("activation").get<std::string>(), i);
      net.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("network file: missing or mistyped field: ") +
                     e.what());
  }
  validate_network(net);
  return net;
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open network file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network_json(ss.str());
}

std::string network_to_json(const Network& net) {
  nlohmann::json j;
  j["input_width"] = net.input_width;
  j["output_width"] = net.output_width;
  j["favorable_output_index"] = net.favorable_output_index;
  j["layers"] = nlohmann::json::array();
  for (const DenseLayer& l : net.layers) {
    nlohmann::json jl;
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < l.weights.rows; ++r) {
      auto row = nlohmann::json::array();
      for (std::size_t c = 0; c < l.weights.cols; ++c) {
        row.push_back(l.weights.at(r, c));
      }
      rows.push_back(std::move(row));
    }
    jl["weights"] = std::move(rows);
    jl["bias"] = l.bias;
    jl["activation"] = l.activation == Activation::ReLU ? "relu" : "identity";
    j["layers"].push_back(std::move(jl));
  }
  return j.dump(2);
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write network file: " + path);
  out << network_to_json(net) << "\n";
}

}  // namespace kfair
