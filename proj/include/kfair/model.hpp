#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace kfair {

using Vector = std::vector<double>;

/// Dense row-major matrix, rows = output width, cols = input width.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

enum class Activation { ReLU, Identity };

struct DenseLayer {
  Matrix weights;
  Vector bias;
  Activation activation = Activation::ReLU;

  std::size_t input_width() const { return weights.cols; }
  std::size_t output_width() const { return weights.rows; }
};

/// Feed-forward affine+ReLU network with a raw-logit output layer.
/// Immutable after load; all evaluation functions are pure.
struct Network {
  std::size_t input_width = 0;
  std::size_t output_width = 0;
  std::size_t favorable_output_index = 0;
  std::vector<DenseLayer> layers;

  std::size_t num_neurons() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.output_width();
    return n;
  }
};

/// Validates layer chaining, finiteness, activation placement. Throws
/// InputError naming the first offending layer.
void validate_network(const Network& net);

/// Last-layer logits. Throws InputError on dimension mismatch / non-finite input.
Vector forward(const Network& net, const Vector& input);

/// Normalized decision score in [0,1]: logistic for 1 output, softmax
/// probability of the favorable class otherwise.
double score(const Network& net, const Vector& input);

/// Score computed from already-evaluated logits.
double score_from_logits(const Network& net, const Vector& logits);

/// Argmax class over logits (ties -> lowest index). Single-output networks
/// return 1 iff score > 0.5.
std::size_t predict_label(const Network& net, const Vector& input);

std::size_t label_from_logits(const Network& net, const Vector& logits);

Network load_network(const std::string& path);
Network parse_network_json(const std::string& text);
void save_network(const Network& net, const std::string& path);
std::string network_to_json(const Network& net);

}  // namespace kfair
