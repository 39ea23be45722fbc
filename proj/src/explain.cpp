#include "kfair/explain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace kfair {

bool ExplanationPredicate::satisfied_by(const FeatureSchema& schema,
                                        const Instance& inst) const {
  (void)schema;
  for (const NumericAtom& a : numeric) {
    const double v = std::get<double>(inst.values[a.feature]);
    if (a.lower && !(v > *a.lower)) return false;
    if (a.upper && !(v <= *a.upper)) return false;
  }
  for (const CategoricalAtom& a : categorical) {
    if (!a.allowed[std::get<std::size_t>(inst.values[a.feature])]) return false;
  }
  return true;
}

std::string predicate_text(const ExplanationPredicate& pred,
                           const FeatureSchema& schema) {
  std::vector<std::string> parts;
  auto fmt_num = [](double v) {
    std::ostringstream ss;
    ss.precision(10);
    ss << v;
    return ss.str();
  };
  for (const NumericAtom& a : pred.numeric) {
    const std::string& name = schema.feature(a.feature).name;
    if (a.lower) parts.push_back(name + " > " + fmt_num(*a.lower));
    if (a.upper) parts.push_back(name + " <= " + fmt_num(*a.upper));
  }
  for (const CategoricalAtom& a : pred.categorical) {
    const FeatureSpec& f = schema.feature(a.feature);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < a.allowed.size(); ++i) {
      if (a.allowed[i]) labels.push_back(f.cat().labels[i]);
    }
    if (labels.size() == 1) {
      parts.push_back(f.name + " = " + labels[0]);
    } else {
      std::string set = f.name + " IN {";
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) set += ", ";
        set += labels[i];
      }
      set += "}";
      parts.push_back(std::move(set));
    }
  }
  if (parts.empty()) return "TRUE";
  std::string out = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) out += " AND " + parts[i];
  return out;
}

int DecisionTree::route(const FeatureSchema& schema, const Instance& inst) const {
  (void)schema;
  int cur = 0;
  while (nodes[cur].feature >= 0) {
    const TreeNode& n = nodes[cur];
    bool left;
    if (n.categorical_split) {
      left = std::get<std::size_t>(inst.values[n.feature]) == n.category;
    } else {
      left = std::get<double>(inst.values[n.feature]) <= n.threshold;
    }
    cur = left ? n.left : n.right;
  }
  return cur;
}

std::vector<Instance> local_perturbation(const std::vector<Instance>& seeds,
                                         const FeatureSchema& schema,
                                         const ExplainConfig& config, Rng& rng) {
  if (seeds.empty()) throw InputError("local_perturbation: no seed instances");
  std::vector<Instance> out;
  out.reserve(config.n_samples);
  while (out.size() < config.n_samples) {
    const Instance& seed = seeds[rng.uniform_index(seeds.size())];
    Instance sample = seed;
    for (std::size_t fi : schema.non_protected_indices()) {
      const FeatureSpec& f = schema.feature(fi);
      if (f.numeric()) {
        const NumericKind& n = f.num();
        const double sigma = config.perturb_sigma_fraction * (n.upper - n.lower);
        double v = std::get<double>(seed.values[fi]) + rng.gaussian() * sigma;
        v = std::clamp(v, n.lower, n.upper);
        if (n.integral) v = std::round(v);
        sample.values[fi] = v;
      } else if (rng.bernoulli(config.categorical_flip_prob)) {
        sample.values[fi] = rng.uniform_index(f.cat().labels.size());
      }
    }
    out.push_back(std::move(sample));
  }
  return out;
}

std::pair<std::vector<int>, double> label_high_low(
    const std::vector<std::size_t>& k_values, double percentile) {
  if (k_values.empty()) throw InputError("label_high_low: empty k list");
  if (!(percentile > 0.0 && percentile < 1.0)) {
    throw InputError("percentile must be in (0, 1)");
  }
  std::vector<std::size_t> sorted = k_values;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    throw DegenerateError("all sampled k values equal " +
                          std::to_string(sorted.front()) +
                          "; no high/low contrast to explain");
  }
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(
      std::ceil(percentile * static_cast<double>(sorted.size())));
  const double kappa =
      static_cast<double>(sorted[std::min(rank, sorted.size()) - 1]);

  std::vector<int> labels(k_values.size());
  std::size_t high = 0;
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    labels[i] = static_cast<double>(k_values[i]) >= kappa ? 1 : 0;
    high += labels[i];
  }
  if (high == 0 || high == k_values.size()) {
    throw DegenerateError("high/low split at kappa = " + std::to_string(kappa) +
                          " leaves a single class");
  }
  return {std::move(labels), kappa};
}

// ---------------------------------------------------------------------------
// CART induction
// ---------------------------------------------------------------------------

namespace {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  bool categorical = false;
  double threshold = 0.0;
  std::size_t category = 0;
  double impurity = 0.0;  // weighted child impurity, lower is better
};

double gini(double w_low, double w_high) {
  const double w = w_low + w_high;
  if (w <= 0.0) return 0.0;
  const double pl = w_low / w;
  const double ph = w_high / w;
  return 1.0 - pl * pl - ph * ph;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<Instance>& samples,
              const std::vector<int>& labels, const FeatureSchema& schema,
              const ExplainConfig& config)
      : samples_(samples), labels_(labels), schema_(schema), config_(config) {
    std::size_t high = 0;
    for (int l : labels_) high += l;
    const std::size_t low = labels_.size() - high;
    // Inverse-frequency class weights (HighK is the rare class).
    weight_[0] = low > 0 ? static_cast<double>(labels_.size()) / (2.0 * low) : 0.0;
    weight_[1] = high > 0 ? static_cast<double>(labels_.size()) / (2.0 * high) : 0.0;
  }

  DecisionTree build() {
    std::vector<std::size_t> all(samples_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  int make_leaf(const std::vector<std::size_t>& idx) {
    TreeNode node;
    double w_low = 0.0, w_high = 0.0;
    for (std::size_t i : idx) {
      if (labels_[i] == 1) {
        ++node.count_high;
        w_high += weight_[1];
      } else {
        ++node.count_low;
        w_low += weight_[0];
      }
    }
    node.leaf_class = w_high > w_low ? 1 : 0;
    tree_.nodes.push_back(node);
    return static_cast<int>(tree_.nodes.size()) - 1;
  }

  SplitChoice best_split(const std::vector<std::size_t>& idx) const {
    SplitChoice best;
    double w_low = 0.0, w_high = 0.0;
    for (std::size_t i : idx) {
      (labels_[i] == 1 ? w_high : w_low) += weight_[labels_[i]];
    }
    const double total_w = w_low + w_high;

    for (std::size_t fi : schema_.non_protected_indices()) {
      const FeatureSpec& f = schema_.feature(fi);
      if (f.numeric()) {
        // Sort node samples by value; candidate thresholds are midpoints of
        // consecutive distinct values.
        std::vector<std::pair<double, int>> vals;
        vals.reserve(idx.size());
        for (std::size_t i : idx) {
          vals.emplace_back(std::get<double>(samples_[i].values[fi]), labels_[i]);
        }
        std::sort(vals.begin(), vals.end());
        double lw = 0.0, lh = 0.0;
        std::size_t lcount = 0;
        for (std::size_t p = 0; p + 1 < vals.size(); ++p) {
          (vals[p].second == 1 ? lh : lw) += weight_[vals[p].second];
          ++lcount;
          if (vals[p].first == vals[p + 1].first) continue;
          if (lcount < config_.tree_min_leaf ||
              idx.size() - lcount < config_.tree_min_leaf) {
            continue;
          }
          const double wl = lw + lh;
          const double imp = (wl / total_w) * gini(lw, lh) +
                             ((total_w - wl) / total_w) *
                                 gini(w_low - lw, w_high - lh);
          if (!best.found || imp < best.impurity - 1e-12) {
            best.found = true;
            best.feature = fi;
            best.categorical = false;
            best.threshold = 0.5 * (vals[p].first + vals[p + 1].first);
            best.impurity = imp;
          }
        }
      } else {
        for (std::size_t c = 0; c < f.cat().labels.size(); ++c) {
          double lw = 0.0, lh = 0.0;
          std::size_t lcount = 0;
          for (std::size_t i : idx) {
            if (std::get<std::size_t>(samples_[i].values[fi]) == c) {
              (labels_[i] == 1 ? lh : lw) += weight_[labels_[i]];
              ++lcount;
            }
          }
          if (lcount < config_.tree_min_leaf ||
              idx.size() - lcount < config_.tree_min_leaf) {
            continue;
          }
          const double wl = lw + lh;
          const double imp = (wl / total_w) * gini(lw, lh) +
                             ((total_w - wl) / total_w) *
                                 gini(w_low - lw, w_high - lh);
          if (!best.found || imp < best.impurity - 1e-12) {
            best.found = true;
            best.feature = fi;
            best.categorical = true;
            best.category = c;
            best.impurity = imp;
          }
        }
      }
    }
    return best;
  }

  int grow(const std::vector<std::size_t>& idx, std::size_t depth) {
    std::size_t high = 0;
    for (std::size_t i : idx) high += labels_[i];
    const bool pure = high == 0 || high == idx.size();
    if (pure || depth >= config_.tree_max_depth ||
        idx.size() < 2 * config_.tree_min_leaf) {
      return make_leaf(idx);
    }
    const SplitChoice split = best_split(idx);
    if (!split.found) return make_leaf(idx);

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      bool go_left;
      if (split.categorical) {
        go_left = std::get<std::size_t>(samples_[i].values[split.feature]) ==
                  split.category;
      } else {
        go_left =
            std::get<double>(samples_[i].values[split.feature]) <= split.threshold;
      }
      (go_left ? left : right).push_back(i);
    }
    TreeNode node;
    node.feature = static_cast<int>(split.feature);
    node.categorical_split = split.categorical;
    node.threshold = split.threshold;
    node.category = split.category;
    const int self = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(node);
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    tree_.nodes[self].left = l;
    tree_.nodes[self].right = r;
    tree_.nodes[self].count_low =
        tree_.nodes[l].count_low + tree_.nodes[r].count_low;
    tree_.nodes[self].count_high =
        tree_.nodes[l].count_high + tree_.nodes[r].count_high;
    return self;
  }

  const std::vector<Instance>& samples_;
  const std::vector<int>& labels_;
  const FeatureSchema& schema_;
  const ExplainConfig& config_;
  double weight_[2] = {1.0, 1.0};
  DecisionTree tree_;
};

}  // namespace

DecisionTree build_decision_tree(const std::vector<Instance>& samples,
                                 const std::vector<int>& labels,
                                 const FeatureSchema& schema,
                                 const ExplainConfig& config) {
  if (samples.empty() || samples.size() != labels.size()) {
    throw InputError("build_decision_tree: samples/labels mismatch");
  }
  bool has_low = false, has_high = false;
  for (int l : labels) (l == 1 ? has_high : has_low) = true;
  if (!has_low || !has_high) {
    throw DegenerateError("decision tree needs both classes present");
  }
  TreeBuilder builder(samples, labels, schema, config);
  return builder.build();
}

std::vector<ExtractedPath> extract_paths(const DecisionTree& tree,
                                         const FeatureSchema& schema,
                                         std::vector<std::string>* diagnostics) {
  std::vector<ExtractedPath> out;

  struct Frame {
    int node;
    ExplanationPredicate pred;
  };
  std::vector<Frame> stack;
  stack.push_back({0, {}});
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const TreeNode& n = tree.nodes[frame.node];
    if (n.feature < 0) {
      // Leaf: finalize the merged predicate.
      ExplanationPredicate pred = std::move(frame.pred);
      bool contradictory = false;
      for (const NumericAtom& a : pred.numeric) {
        if (a.lower && a.upper && !(*a.lower < *a.upper)) contradictory = true;
      }
      for (const CategoricalAtom& a : pred.categorical) {
        if (std::none_of(a.allowed.begin(), a.allowed.end(),
                         [](bool b) { return b; })) {
          contradictory = true;
        }
      }
      if (contradictory) {
        if (diagnostics) {
          diagnostics->push_back("dropped contradictory path at leaf " +
                                 std::to_string(frame.node));
        }
        continue;
      }
      pred.size = pred.numeric.size();
      for (const CategoricalAtom& a : pred.categorical) {
        if (std::count(a.allowed.begin(), a.allowed.end(), true) <
            static_cast<long>(a.allowed.size())) {
          ++pred.size;
        }
      }
      pred.text = predicate_text(pred, schema);
      out.push_back({frame.node, n.leaf_class, std::move(pred)});
      continue;
    }

    auto with_numeric = [&](const ExplanationPredicate& base, bool upper_side,
                            double t) {
      ExplanationPredicate next = base;
      NumericAtom* atom = nullptr;
      for (NumericAtom& a : next.numeric) {
        if (a.feature == static_cast<std::size_t>(n.feature)) atom = &a;
      }
      if (!atom) {
        next.numeric.push_back({static_cast<std::size_t>(n.feature), {}, {}});
        atom = &next.numeric.back();
      }
      if (upper_side) {
        atom->upper = atom->upper ? std::min(*atom->upper, t) : t;
      } else {
        atom->lower = atom->lower ? std::max(*atom->lower, t) : t;
      }
      return next;
    };
    auto with_categorical = [&](const ExplanationPredicate& base, bool equal) {
      ExplanationPredicate next = base;
      CategoricalAtom* atom = nullptr;
      for (CategoricalAtom& a : next.categorical) {
        if (a.feature == static_cast<std::size_t>(n.feature)) atom = &a;
      }
      if (!atom) {
        const std::size_t n_labels =
            schema.feature(n.feature).cat().labels.size();
        next.categorical.push_back({static_cast<std::size_t>(n.feature),
                                    std::vector<bool>(n_labels, true)});
        atom = &next.categorical.back();
      }
      for (std::size_t c = 0; c < atom->allowed.size(); ++c) {
        if (equal) {
          if (c != n.category) atom->allowed[c] = false;
        } else if (c == n.category) {
          atom->allowed[c] = false;
        }
      }
      return next;
    };

    if (n.categorical_split) {
      stack.push_back({n.right, with_categorical(frame.pred, false)});
      stack.push_back({n.left, with_categorical(frame.pred, true)});
    } else {
      stack.push_back({n.right, with_numeric(frame.pred, false, n.threshold)});
      stack.push_back({n.left, with_numeric(frame.pred, true, n.threshold)});
    }
  }
  return out;
}

double coverage_volume(const ExplanationPredicate& pred,
                       const FeatureSchema& schema,
                       std::optional<double>* raw_count) {
  double volume = 1.0;
  double raw = 1.0;
  bool finite = true;
  for (std::size_t fi : schema.non_protected_indices()) {
    const FeatureSpec& f = schema.feature(fi);
    const NumericAtom* na = nullptr;
    for (const NumericAtom& a : pred.numeric) {
      if (a.feature == fi) na = &a;
    }
    const CategoricalAtom* ca = nullptr;
    for (const CategoricalAtom& a : pred.categorical) {
      if (a.feature == fi) ca = &a;
    }
    if (f.numeric()) {
      const NumericKind& n = f.num();
      double lo = n.lower, hi = n.upper;
      if (na) {
        if (na->lower) lo = std::max(lo, *na->lower);
        if (na->upper) hi = std::min(hi, *na->upper);
      }
      if (n.integral) {
        // Count integers v with lo < v <= hi intersected with the domain
        // (the lower side is strict when it comes from an atom).
        const double first = na && na->lower ? std::floor(*na->lower) + 1.0
                                             : n.lower;
        const double lo_int = std::max(n.lower, first);
        const double hi_int = std::floor(std::min(n.upper, hi));
        const double count = std::max(0.0, hi_int - lo_int + 1.0);
        volume *= count / (n.upper - n.lower + 1.0);
        raw *= count;
      } else {
        const double width = std::max(0.0, hi - lo);
        volume *= width / (n.upper - n.lower);
        finite = false;
      }
    } else {
      const auto n_labels = static_cast<double>(f.cat().labels.size());
      double allowed = n_labels;
      if (ca) {
        allowed = static_cast<double>(
            std::count(ca->allowed.begin(), ca->allowed.end(), true));
      }
      volume *= allowed / n_labels;
      raw *= allowed;
    }
  }
  if (raw_count) {
    *raw_count = finite ? std::optional<double>(raw) : std::nullopt;
  }
  return volume;
}

RobustnessResult robustness_diff(const ScoreFn& fn, const FeatureSchema& schema,
                                 const ExplanationPredicate& pred,
                                 const Instance& witness, double epsilon) {
  if (!pred.satisfied_by(schema, witness)) {
    throw InputError("robustness_diff: witness does not satisfy the predicate");
  }
  RobustnessResult res;
  res.witness_k = static_cast<double>(
      k_discrimination(fn, schema, witness, epsilon).k_value);

  double k_sum = 0.0;
  auto probe = [&](Instance flipped) {
    k_sum += static_cast<double>(
        k_discrimination(fn, schema, flipped, epsilon).k_value);
    ++res.features_flipped;
  };

  for (const NumericAtom& a : pred.numeric) {
    const NumericKind& n = schema.feature(a.feature).num();
    const double step = n.integral ? 1.0 : 0.01 * (n.upper - n.lower);
    Instance flipped = witness;
    if (a.upper && *a.upper + step <= n.upper) {
      flipped.values[a.feature] =
          n.integral ? std::round(*a.upper + step) : *a.upper + step;
      probe(std::move(flipped));
    } else if (a.lower && *a.lower - step >= n.lower) {
      double v = n.integral ? std::floor(*a.lower) : *a.lower - step;
      flipped.values[a.feature] = std::clamp(v, n.lower, n.upper);
      probe(std::move(flipped));
    }
    // Atoms spanning the whole domain have no outside value: skipped.
  }
  for (const CategoricalAtom& a : pred.categorical) {
    std::size_t disallowed = a.allowed.size();
    for (std::size_t c = 0; c < a.allowed.size(); ++c) {
      if (!a.allowed[c]) {
        disallowed = c;
        break;
      }
    }
    if (disallowed == a.allowed.size()) continue;  // full-domain atom
    Instance flipped = witness;
    flipped.values[a.feature] = disallowed;
    probe(std::move(flipped));
  }

  if (res.features_flipped > 0) {
    res.pert_k = k_sum / static_cast<double>(res.features_flipped);
    res.diff = res.witness_k - res.pert_k;
  }
  return res;
}

namespace {

std::vector<std::size_t> evaluate_k_parallel(const ScoreFn& fn,
                                             const FeatureSchema& schema,
                                             const std::vector<Instance>& samples,
                                             double epsilon, int workers) {
  std::vector<std::size_t> k(samples.size(), 1);
  auto eval_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      k[i] = k_discrimination(fn, schema, samples[i], epsilon).k_value;
    }
  };
  if (workers <= 1 || samples.size() < 256) {
    eval_range(0, samples.size());
    return k;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (samples.size() + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = std::min(samples.size(), w * chunk);
    const std::size_t hi = std::min(samples.size(), lo + chunk);
    if (lo < hi) pool.emplace_back(eval_range, lo, hi);
  }
  for (auto& t : pool) t.join();
  return k;
}

}  // namespace

std::optional<ExplanationPredicate> validate_path(
    const ScoreFn& fn, const FeatureSchema& schema, ExplanationPredicate pred,
    const std::vector<std::size_t>& k_inside, const ExplainConfig& config,
    Rng& rng, std::string* diagnostic) {
  if (k_inside.empty()) {
    if (diagnostic) *diagnostic = "no samples reach the leaf";
    return std::nullopt;
  }
  // Counter-samples: uniform instances falsifying the predicate.
  std::vector<Instance> cex;
  cex.reserve(config.cex_samples);
  std::size_t draws = 0;
  const std::size_t draw_cap = 100000;
  while (cex.size() < config.cex_samples && draws < draw_cap) {
    ++draws;
    Instance inst = schema.random_instance(rng);
    if (!pred.satisfied_by(schema, inst)) cex.push_back(std::move(inst));
  }
  if (cex.size() < config.cex_samples) {
    if (diagnostic) {
      *diagnostic = "negation sampling exhausted " + std::to_string(draw_cap) +
                    " draws (predicate covers nearly the whole space)";
    }
    return std::nullopt;
  }

  double inside = 0.0;
  for (std::size_t k : k_inside) inside += static_cast<double>(k);
  inside /= static_cast<double>(k_inside.size());
  double outside = 0.0;
  for (const Instance& inst : cex) {
    outside += static_cast<double>(
        k_discrimination(fn, schema, inst, config.epsilon).k_value);
  }
  outside /= static_cast<double>(cex.size());

  pred.mean_k_inside = inside;
  pred.mean_k_outside = outside;
  pred.mean_k_diff = inside - outside;
  if (pred.mean_k_diff < config.delta) {
    if (diagnostic) {
      std::ostringstream ss;
      ss << "mean-k difference " << pred.mean_k_diff << " below delta "
         << config.delta;
      *diagnostic = ss.str();
    }
    return std::nullopt;
  }
  std::optional<double> raw;
  pred.coverage_volume = coverage_volume(pred, schema, &raw);
  pred.coverage_raw = raw;
  return pred;
}

ExplainOutcome run_explain(const Network& net, const FeatureSchema& schema,
                           const std::vector<Instance>& seed_instances,
                           const ExplainConfig& config) {
  if (seed_instances.empty()) {
    throw InputError("explain: no seed instances (run a search first)");
  }
  if (config.n_samples < 100) {
    throw InputError("explain: n_samples must be at least 100");
  }
  Rng rng(split_seed(config.rng_seed, 0xe781a1));
  const ScoreFn fn = make_score_fn(net);

  ExplainOutcome out;
  const std::vector<Instance> samples =
      local_perturbation(seed_instances, schema, config, rng);
  const std::vector<std::size_t> k_values =
      evaluate_k_parallel(fn, schema, samples, config.epsilon, config.workers);

  auto [labels, kappa] = label_high_low(k_values, config.high_k_percentile);
  out.kappa = kappa;
  out.n_samples = samples.size();
  for (int l : labels) (l == 1 ? out.n_high : out.n_low) += 1;

  out.tree = build_decision_tree(samples, labels, schema, config);

  // Per-leaf k lists for the inside means.
  std::vector<std::vector<std::size_t>> leaf_k(out.tree.nodes.size());
  std::vector<std::vector<std::size_t>> leaf_members(out.tree.nodes.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int leaf = out.tree.route(schema, samples[i]);
    leaf_k[leaf].push_back(k_values[i]);
    leaf_members[leaf].push_back(i);
  }

  for (ExtractedPath& path :
       extract_paths(out.tree, schema, &out.diagnostics)) {
    if (path.leaf_class != 1) continue;
    std::string why;
    auto validated = validate_path(fn, schema, path.predicate,
                                   leaf_k[path.leaf], config, rng, &why);
    if (!validated) {
      out.diagnostics.push_back("leaf " + std::to_string(path.leaf) + ": " + why);
      continue;
    }
    // Witness: the leaf sample with the highest k (first on ties).
    std::size_t witness_idx = leaf_members[path.leaf].empty()
                                  ? SIZE_MAX
                                  : leaf_members[path.leaf][0];
    std::size_t best_k = 0;
    for (std::size_t i : leaf_members[path.leaf]) {
      if (k_values[i] > best_k) {
        best_k = k_values[i];
        witness_idx = i;
      }
    }
    if (witness_idx != SIZE_MAX &&
        validated->satisfied_by(schema, samples[witness_idx])) {
      const RobustnessResult rob = robustness_diff(
          fn, schema, *validated, samples[witness_idx], config.epsilon);
      validated->witness_k = rob.witness_k;
      validated->pert_k = rob.pert_k;
      validated->robustness_diff = rob.diff;
    }
    out.accepted.push_back(std::move(*validated));
  }
  return out;
}

}  // namespace kfair
