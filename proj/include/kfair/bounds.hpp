#pragma once

#include <cstddef>
#include <vector>

#include "kfair/model.hpp"

namespace kfair {

struct Box {
  Vector lower;
  Vector upper;

  std::size_t size() const { return lower.size(); }
  bool contains(const Vector& x, double slack = 0.0) const;
};

/// Unit input box [0,1]^width (the encoded feature space).
Box unit_box(std::size_t width);

/// Per-layer pre- and post-activation interval bounds.
struct LayerBounds {
  std::vector<Box> pre;   // one per layer
  std::vector<Box> post;  // one per layer (equal to pre on identity layers)
};

/// Interval arithmetic through affine+ReLU layers. Sound: every forward pass
/// from the input box stays inside the returned bounds.
LayerBounds propagate(const Network& net, const Box& input_box);

/// Slack added to interval bounds before they are used as big-M constants,
/// guarding against floating-point under-coverage.
constexpr double kBigMSlack = 1e-6;

}  // namespace kfair
