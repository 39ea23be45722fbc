#include "kfair/mitigate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "kfair/errors.hpp"
#include "kfair/rng.hpp"

namespace kfair {

std::optional<double> guard_score(const GuardedModel& model,
                                  const FeatureSchema& schema,
                                  const Instance& inst) {
  for (const ExplanationPredicate& g : model.guards) {
    if (g.satisfied_by(schema, inst)) {
      if (model.policy == GuardPolicy::FixedScore) return model.fixed_score;
      return std::nullopt;
    }
  }
  return score(model.network, schema.encode(inst));
}

ScoreFn make_guarded_score_fn(const GuardedModel& model,
                              const FeatureSchema& schema) {
  return [&model, &schema](const Vector& encoded) -> std::optional<double> {
    const Instance inst = schema.decode(encoded);
    for (const ExplanationPredicate& g : model.guards) {
      if (g.satisfied_by(schema, inst)) {
        if (model.policy == GuardPolicy::FixedScore) return model.fixed_score;
        return std::nullopt;
      }
    }
    return score(model.network, encoded);
  };
}

namespace {

std::string encoded_key(const Vector& encoded) {
  std::string key;
  char buf[32];
  for (double v : encoded) {
    std::snprintf(buf, sizeof(buf), "%.9f|", v);
    key += buf;
  }
  return key;
}

}  // namespace

Dataset augment_dataset(const Dataset& data,
                        const std::vector<DiscriminationRecord>& discriminatory,
                        const FeatureSchema& schema, const Network& net) {
  Dataset out = data;
  if (!data.has_labels() && !data.rows.empty()) {
    throw InputError("augment_dataset: the base dataset has no labels");
  }
  std::unordered_set<std::string> seen;
  for (const Instance& inst : data.rows) {
    seen.insert(encoded_key(schema.encode(inst)));
  }
  const std::size_t favorable =
      net.output_width == 1 ? 1 : net.favorable_output_index;
  for (const DiscriminationRecord& rec : discriminatory) {
    const auto counterfactuals = schema.enumerate_counterfactuals(rec.instance);
    // Majority predicted label across the counterfactual set.
    std::vector<std::size_t> votes;
    std::vector<std::size_t> labels;
    for (const Instance& cf : counterfactuals) {
      const std::size_t label = predict_label(net, schema.encode(cf));
      labels.push_back(label);
      if (label >= votes.size()) votes.resize(label + 1, 0);
      ++votes[label];
    }
    std::size_t majority = favorable;
    std::size_t best = 0;
    bool tie = false;
    for (std::size_t l = 0; l < votes.size(); ++l) {
      if (votes[l] > best) {
        best = votes[l];
        majority = l;
        tie = false;
      } else if (votes[l] == best && votes[l] > 0) {
        tie = true;
      }
    }
    if (tie) majority = favorable;
    for (const Instance& cf : counterfactuals) {
      if (!seen.insert(encoded_key(schema.encode(cf))).second) continue;
      out.rows.push_back(cf);
      out.labels.push_back(majority);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fine-tuning with explicit backpropagation
// ---------------------------------------------------------------------------

namespace {

struct ForwardTrace {
  std::vector<Vector> pre;   // per layer
  std::vector<Vector> post;  // per layer (post[last] = logits)
};

ForwardTrace traced_forward(const Network& net, const Vector& input) {
  ForwardTrace t;
  Vector cur = input;
  for (const DenseLayer& l : net.layers) {
    Vector pre(l.output_width());
    for (std::size_t r = 0; r < l.output_width(); ++r) {
      double acc = l.bias[r];
      for (std::size_t c = 0; c < l.weights.cols; ++c) {
        acc += l.weights.at(r, c) * cur[c];
      }
      pre[r] = acc;
    }
    Vector post = pre;
    if (l.activation == Activation::ReLU) {
      for (auto& v : post) v = std::max(v, 0.0);
    }
    t.pre.push_back(std::move(pre));
    t.post.push_back(post);
    cur = std::move(post);
  }
  return t;
}

/// dLoss/dLogit for logistic (1 output) or softmax cross-entropy.
Vector output_delta(const Network& net, const Vector& logits, std::size_t label) {
  if (net.output_width == 1) {
    const double p = 1.0 / (1.0 + std::exp(-logits[0]));
    return {p - (label == 1 ? 1.0 : 0.0)};
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double v : logits) denom += std::exp(v - m);
  Vector delta(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    delta[i] = std::exp(logits[i] - m) / denom - (i == label ? 1.0 : 0.0);
  }
  return delta;
}

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> bias;

  explicit Gradients(const Network& net) {
    for (const DenseLayer& l : net.layers) {
      weights.emplace_back(l.weights.rows, l.weights.cols);
      bias.emplace_back(l.output_width(), 0.0);
    }
  }

  void accumulate(const Network& net, const Vector& input, std::size_t label) {
    const ForwardTrace t = traced_forward(net, input);
    Vector delta = output_delta(net, t.post.back(), label);
    for (std::size_t li = net.layers.size(); li-- > 0;) {
      const DenseLayer& l = net.layers[li];
      const Vector& in = li == 0 ? input : t.post[li - 1];
      for (std::size_t r = 0; r < l.output_width(); ++r) {
        bias[li][r] += delta[r];
        for (std::size_t c = 0; c < l.weights.cols; ++c) {
          weights[li].at(r, c) += delta[r] * in[c];
        }
      }
      if (li == 0) break;
      Vector prev(l.weights.cols, 0.0);
      for (std::size_t c = 0; c < l.weights.cols; ++c) {
        double acc = 0.0;
        for (std::size_t r = 0; r < l.output_width(); ++r) {
          acc += l.weights.at(r, c) * delta[r];
        }
        // ReLU derivative of the upstream layer's pre-activation.
        if (net.layers[li - 1].activation == Activation::ReLU &&
            t.pre[li - 1][c] <= 0.0) {
          acc = 0.0;
        }
        prev[c] = acc;
      }
      delta = std::move(prev);
    }
  }

  void scale(double f) {
    for (auto& m : weights) {
      for (auto& v : m.data) v *= f;
    }
    for (auto& b : bias) {
      for (auto& v : b) v *= f;
    }
  }
};

}  // namespace

double loss_value(const Network& net, const Vector& input, std::size_t label) {
  const Vector logits = forward(net, input);
  if (net.output_width == 1) {
    const double z = logits[0];
    // Numerically stable logistic loss: log(1+e^z) - y*z.
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z))
                                  : std::log1p(std::exp(z));
    return softplus - (label == 1 ? z : 0.0);
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double v : logits) denom += std::exp(v - m);
  return std::log(denom) - (logits[label] - m);
}

Vector loss_gradient(const Network& net, const Vector& input,
                     std::size_t label) {
  Gradients g(net);
  g.accumulate(net, input, label);
  Vector flat;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    flat.insert(flat.end(), g.weights[li].data.begin(), g.weights[li].data.end());
    flat.insert(flat.end(), g.bias[li].begin(), g.bias[li].end());
  }
  return flat;
}

Network fine_tune(const Network& net, const Dataset& data,
                  const FeatureSchema& schema, const FineTuneConfig& config) {
  if (!data.has_labels()) throw InputError("fine_tune: dataset has no labels");
  for (std::size_t label : data.labels) {
    const std::size_t n_classes = net.output_width == 1 ? 2 : net.output_width;
    if (label >= n_classes) {
      throw InputError("fine_tune: label " + std::to_string(label) +
                       " out of range");
    }
  }
  Network tuned = net;
  if (config.epochs == 0) return tuned;

  std::vector<Vector> encoded;
  encoded.reserve(data.rows.size());
  for (const Instance& inst : data.rows) encoded.push_back(schema.encode(inst));

  Rng rng(split_seed(config.rng_seed, 0xf17e));
  std::vector<std::size_t> order(data.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Gradients g(tuned);
      for (std::size_t i = start; i < end; ++i) {
        g.accumulate(tuned, encoded[order[i]], data.labels[order[i]]);
      }
      g.scale(1.0 / static_cast<double>(end - start));
      for (std::size_t li = 0; li < tuned.layers.size(); ++li) {
        DenseLayer& l = tuned.layers[li];
        for (std::size_t k = 0; k < l.weights.data.size(); ++k) {
          l.weights.data[k] -= config.learning_rate * g.weights[li].data[k];
        }
        for (std::size_t k = 0; k < l.bias.size(); ++k) {
          l.bias[k] -= config.learning_rate * g.bias[li][k];
        }
      }
    }
    // Divergence check once per epoch.
    double loss = 0.0;
    for (std::size_t i = 0; i < encoded.size(); ++i) {
      loss += loss_value(tuned, encoded[i], data.labels[i]);
    }
    if (!std::isfinite(loss)) {
      throw NumericError("fine_tune diverged at epoch " + std::to_string(epoch));
    }
  }
  return tuned;
}

double accuracy(const Network& net, const FeatureSchema& schema,
                const Dataset& data) {
  if (!data.has_labels() || data.rows.empty()) {
    throw InputError("accuracy: dataset has no labels");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    hits += predict_label(net, schema.encode(data.rows[i])) == data.labels[i];
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(data.rows.size());
}

MitigationReport evaluate_mitigation(
    const Network& original, const std::optional<Network>& debiased,
    const std::vector<ExplanationPredicate>& guards, const FeatureSchema& schema,
    const Dataset& search_data, const Dataset& holdout,
    const MitigateConfig& config) {
  MitigationReport report;

  auto run_variant = [&](const std::string& name, const Network& net,
                         bool with_guards) {
    MitigationRow row;
    row.variant = name;
    row.accuracy_percent = accuracy(net, schema, holdout);
    if (with_guards) {
      GuardedModel gm{net, guards, config.policy, 0.5, config.abstain_mode};
      const ScoreFn fn = make_guarded_score_fn(gm, schema);
      row.search = run_search_scored(net, fn, config.abstain_mode, schema,
                                     search_data, config.search);
    } else {
      row.search = run_search(net, schema, search_data, config.search);
    }
    report.rows.push_back(std::move(row));
  };

  run_variant("original", original, false);
  run_variant("original+dt", original, true);
  if (debiased) {
    run_variant("debiased", *debiased, false);
    run_variant("debiased+dt", *debiased, true);
    report.accuracy_delta =
        report.rows[2].accuracy_percent - report.rows[0].accuracy_percent;
  }
  return report;
}

}  // namespace kfair
