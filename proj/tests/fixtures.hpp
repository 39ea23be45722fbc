#pragma once

// Shared test fixtures: small schemas, random networks, planted bundles.

#include <cstdint>
#include <string>
#include <vector>

#include "kfair/data.hpp"
#include "kfair/model.hpp"
#include "kfair/rng.hpp"
#include "kfair/schema.hpp"

namespace kfair::testing {

/// One continuous non-protected feature, one binary protected feature (K=2).
inline FeatureSchema tiny_schema() {
  FeatureSpec x{"x", NumericKind{0.0, 1.0, false}, false};
  FeatureSpec g{"group", CategoricalKind{{"a", "b"}}, true};
  return FeatureSchema({x, g}, {});
}

/// All-categorical schema with a finite, enumerable input space.
/// `levels` lists non-protected label counts; `protected_levels` likewise.
inline FeatureSchema categorical_schema(
    const std::vector<std::size_t>& levels,
    const std::vector<std::size_t>& protected_levels) {
  std::vector<FeatureSpec> specs;
  std::size_t n = 0;
  for (std::size_t l : levels) {
    CategoricalKind kind;
    for (std::size_t i = 0; i < l; ++i) {
      kind.labels.push_back("v" + std::to_string(i));
    }
    specs.push_back({"f" + std::to_string(n++), kind, false});
  }
  for (std::size_t l : protected_levels) {
    CategoricalKind kind;
    for (std::size_t i = 0; i < l; ++i) {
      kind.labels.push_back("g" + std::to_string(i));
    }
    specs.push_back({"p" + std::to_string(n++), kind, true});
  }
  return FeatureSchema(specs, {});
}

/// Random fully-connected network; hidden layers ReLU, output identity.
/// Weights ~ U(-scale, scale).
inline Network random_network(Rng& rng, std::size_t input_width,
                              const std::vector<std::size_t>& hidden,
                              std::size_t output_width, double scale = 1.0) {
  Network net;
  net.input_width = input_width;
  net.output_width = output_width;
  net.favorable_output_index = output_width == 1 ? 0 : 1;
  std::size_t prev = input_width;
  auto make_layer = [&](std::size_t width, Activation act) {
    DenseLayer l;
    l.activation = act;
    l.weights = Matrix(width, prev);
    for (auto& w : l.weights.data) w = rng.uniform(-scale, scale);
    l.bias.resize(width);
    for (auto& b : l.bias) b = rng.uniform(-scale, scale);
    prev = width;
    return l;
  };
  for (std::size_t h : hidden) net.layers.push_back(make_layer(h, Activation::ReLU));
  net.layers.push_back(make_layer(output_width, Activation::Identity));
  validate_network(net);
  return net;
}

/// Planted bundle: two continuous features + one K-label protected feature,
/// region [0.3, 0.7]^2 in encoded units, offsets at bucket centers so max k
/// is exactly `target_k` with epsilon 0.05.
struct PlantedBundle {
  FeatureSchema schema;
  PlantSpec plant;
  Network net;
  std::size_t target_k;
};

inline PlantedBundle planted_bundle(std::size_t K, std::size_t target_k) {
  CategoricalKind kind;
  for (std::size_t i = 0; i < K; ++i) kind.labels.push_back("g" + std::to_string(i));
  std::vector<FeatureSpec> specs = {
      {"x0", NumericKind{0.0, 100.0, false}, false},
      {"x1", NumericKind{0.0, 1.0, false}, false},
      {"group", kind, true},
  };
  FeatureSchema schema(specs, {});

  PlantSpec plant;
  plant.region = {{0, 0.3, 0.7}, {1, 0.3, 0.7}};
  plant.base_score = 0.025;
  plant.ramp_width = 0.02;
  // Offsets walk the bucket centers 0..target_k-1 and then repeat the top.
  for (std::size_t c = 0; c < K; ++c) {
    const std::size_t bucket = c < target_k ? c : target_k - 1;
    plant.offsets.push_back(0.05 * static_cast<double>(bucket));
  }
  Network net = make_planted_network(schema, plant);
  return {std::move(schema), std::move(plant), std::move(net), target_k};
}

/// Staged plant for time-to-target experiments: k = 3 on [0.2,0.8]^2,
/// k ~ K/2 on [0.32,0.68]^2, k = target (= K) on [0.44,0.56]^2.
inline PlantedBundle staged_bundle(std::size_t K) {
  CategoricalKind kind;
  for (std::size_t i = 0; i < K; ++i) kind.labels.push_back("g" + std::to_string(i));
  std::vector<FeatureSpec> specs = {
      {"x0", NumericKind{0.0, 100.0, false}, false},
      {"x1", NumericKind{0.0, 1.0, false}, false},
      {"group", kind, true},
  };
  FeatureSchema schema(specs, {});

  auto offsets_for = [K](std::size_t k_target) {
    std::vector<double> offsets;
    for (std::size_t c = 0; c < K; ++c) {
      offsets.push_back(0.05 * static_cast<double>(c % k_target));
    }
    return offsets;
  };
  PlantSpec plant;
  plant.region = {{0, 0.2, 0.8}, {1, 0.2, 0.8}};
  plant.offsets = offsets_for(std::min<std::size_t>(3, K));
  const std::size_t mid = std::max<std::size_t>(3, K / 2);
  plant.extra_stages.push_back({{{0, 0.32, 0.68}, {1, 0.32, 0.68}},
                                offsets_for(mid)});
  plant.extra_stages.push_back({{{0, 0.44, 0.56}, {1, 0.44, 0.56}},
                                offsets_for(K)});
  Network net = make_planted_network(schema, plant);
  return {std::move(schema), std::move(plant), std::move(net), K};
}

inline Instance instance_at(const FeatureSchema& schema, double x0_encoded,
                            double x1_encoded, std::size_t group) {
  Instance inst;
  inst.values.resize(3);
  inst.values[0] = x0_encoded * 100.0;
  inst.values[1] = x1_encoded;
  inst.values[2] = group;
  schema.validate_instance(inst);
  return inst;
}

}  // namespace kfair::testing
