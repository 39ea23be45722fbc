#include "kfair/bounds.hpp"

#include <algorithm>

#include "kfair/errors.hpp"

namespace kfair {

bool Box::contains(const Vector& x, double slack) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] - slack || x[i] > upper[i] + slack) return false;
  }
  return true;
}

Box unit_box(std::size_t width) {
  return Box{Vector(width, 0.0), Vector(width, 1.0)};
}

LayerBounds propagate(const Network& net, const Box& input_box) {
  if (input_box.size() != net.input_width) {
    throw InputError("propagate: input box width " +
                     std::to_string(input_box.size()) + " != input_width " +
                     std::to_string(net.input_width));
  }
  for (std::size_t i = 0; i < input_box.size(); ++i) {
    if (input_box.lower[i] > input_box.upper[i]) {
      throw InputError("propagate: inverted input box at coordinate " +
                       std::to_string(i));
    }
  }

  LayerBounds out;
  Vector lo = input_box.lower;
  Vector hi = input_box.upper;
  for (const DenseLayer& l : net.layers) {
    Box pre{Vector(l.output_width()), Vector(l.output_width())};
    for (std::size_t r = 0; r < l.output_width(); ++r) {
      double a = l.bias[r];
      double b = l.bias[r];
      for (std::size_t c = 0; c < l.weights.cols; ++c) {
        const double w = l.weights.at(r, c);
        if (w >= 0.0) {
          a += w * lo[c];
          b += w * hi[c];
        } else {
          a += w * hi[c];
          b += w * lo[c];
        }
      }
      pre.lower[r] = a;
      pre.upper[r] = b;
    }
    Box post = pre;
    if (l.activation == Activation::ReLU) {
      for (std::size_t r = 0; r < l.output_width(); ++r) {
        post.lower[r] = std::max(post.lower[r], 0.0);
        post.upper[r] = std::max(post.upper[r], 0.0);
      }
    }
    lo = post.lower;
    hi = post.upper;
    out.pre.push_back(std::move(pre));
    out.post.push_back(std::move(post));
  }
  return out;
}

}  // namespace kfair
