#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kfair/cluster.hpp"
#include "kfair/errors.hpp"
#include "kfair/model.hpp"
#include "kfair/rng.hpp"
#include "kfair/schema.hpp"

namespace kfair {

/// Raised when the k distribution is degenerate (a single class); the CLI
/// maps it to its own exit code.
class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& msg) : Error(msg) {}
};

struct ExplainConfig {
  std::size_t n_samples = 5000;
  double high_k_percentile = 0.95;
  double delta = 2.0;  // min mean-k gap (in buckets) to keep a path
  std::size_t tree_max_depth = 6;
  std::size_t tree_min_leaf = 20;
  double perturb_sigma_fraction = 0.10;
  double categorical_flip_prob = 0.10;
  std::size_t cex_samples = 500;
  double epsilon = 0.05;
  std::uint64_t rng_seed = 0;
  int workers = 1;
};

struct NumericAtom {
  std::size_t feature = 0;
  std::optional<double> lower;  // value > lower
  std::optional<double> upper;  // value <= upper
};

struct CategoricalAtom {
  std::size_t feature = 0;
  std::vector<bool> allowed;  // per label
};

/// Conjunction of per-feature conditions extracted from one tree path.
struct ExplanationPredicate {
  std::vector<NumericAtom> numeric;
  std::vector<CategoricalAtom> categorical;
  std::size_t size = 0;  // constrained feature count after merging

  double coverage_volume = 1.0;      // normalized fraction of the input box
  std::optional<double> coverage_raw;  // discrete count on finite schemas
  double mean_k_inside = 0.0;
  double mean_k_outside = 0.0;
  double mean_k_diff = 0.0;
  double witness_k = 0.0;
  double pert_k = 0.0;          // mean k after one-feature flips (Pert.K)
  double robustness_diff = 0.0; // witness k minus pert_k (Diff)
  std::string text;             // canonical rendering

  bool satisfied_by(const FeatureSchema& schema, const Instance& inst) const;
};

std::string predicate_text(const ExplanationPredicate& pred,
                           const FeatureSchema& schema);

struct TreeNode {
  int feature = -1;  // -1: leaf
  bool categorical_split = false;
  double threshold = 0.0;    // numeric: value <= threshold goes left
  std::size_t category = 0;  // categorical: value == category goes left
  int left = -1;
  int right = -1;
  int leaf_class = -1;  // 0 = LowK, 1 = HighK
  std::size_t count_low = 0;
  std::size_t count_high = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root
  int route(const FeatureSchema& schema, const Instance& inst) const;  // leaf id
};

/// n_samples jittered copies of uniformly chosen seeds (Gaussian numerics,
/// flip-probability categoricals, protected features untouched).
std::vector<Instance> local_perturbation(const std::vector<Instance>& seeds,
                                         const FeatureSchema& schema,
                                         const ExplainConfig& config, Rng& rng);

/// Nearest-rank percentile threshold kappa; label HighK iff k >= kappa.
/// Throws DegenerateError when one class would be empty.
std::pair<std::vector<int>, double> label_high_low(
    const std::vector<std::size_t>& k_values, double percentile);

/// Greedy CART, Gini impurity with inverse-frequency class weights; splits
/// only on non-protected features; deterministic tie-breaks (lowest feature,
/// then lowest threshold).
DecisionTree build_decision_tree(const std::vector<Instance>& samples,
                                 const std::vector<int>& labels,
                                 const FeatureSchema& schema,
                                 const ExplainConfig& config);

struct ExtractedPath {
  int leaf = -1;
  int leaf_class = -1;
  ExplanationPredicate predicate;
};

/// Root-to-leaf conjunctions with per-feature atoms merged; contradictory
/// paths are dropped (diagnostic returned alongside).
std::vector<ExtractedPath> extract_paths(const DecisionTree& tree,
                                         const FeatureSchema& schema,
                                         std::vector<std::string>* diagnostics);

/// Fraction of the non-protected input space satisfying the predicate
/// (product over features); also fills the raw discrete count when every
/// non-protected feature has a finite domain.
double coverage_volume(const ExplanationPredicate& pred,
                       const FeatureSchema& schema,
                       std::optional<double>* raw_count);

struct RobustnessResult {
  double witness_k = 0.0;
  double pert_k = 0.0;
  double diff = 0.0;
  std::size_t features_flipped = 0;
};

/// Flip the witness just outside each constrained feature, one at a time,
/// and measure the k drop.
RobustnessResult robustness_diff(const ScoreFn& fn, const FeatureSchema& schema,
                                 const ExplanationPredicate& pred,
                                 const Instance& witness, double epsilon);

/// Counter-sample validation of one HighK path: draws config.cex_samples
/// instances falsifying the predicate, compares mean k inside (over the
/// leaf's samples) against outside, and keeps the path iff the gap reaches
/// delta. Fills coverage on acceptance.
std::optional<ExplanationPredicate> validate_path(
    const ScoreFn& fn, const FeatureSchema& schema, ExplanationPredicate pred,
    const std::vector<std::size_t>& k_inside, const ExplainConfig& config,
    Rng& rng, std::string* diagnostic);

struct ExplainOutcome {
  double kappa = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_high = 0;
  std::size_t n_low = 0;
  DecisionTree tree;
  std::vector<ExplanationPredicate> accepted;
  std::vector<std::string> diagnostics;
};

/// Full Algorithm-2 pipeline around max-k witnesses.
ExplainOutcome run_explain(const Network& net, const FeatureSchema& schema,
                           const std::vector<Instance>& seed_instances,
                           const ExplainConfig& config);

}  // namespace kfair
