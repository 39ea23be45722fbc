#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kfair/cluster.hpp"
#include "kfair/data.hpp"
#include "kfair/explain.hpp"
#include "kfair/model.hpp"
#include "kfair/schema.hpp"
#include "kfair/search.hpp"

namespace kfair {

enum class GuardPolicy { Abstain, FixedScore };

/// A network wrapped in decision-rule guardrails: inputs matching any guard
/// predicate get the policy outcome instead of a score.
struct GuardedModel {
  Network network;
  std::vector<ExplanationPredicate> guards;
  GuardPolicy policy = GuardPolicy::Abstain;
  double fixed_score = 0.5;
  /// How abstained outcomes enter k: one reserved bucket (default) or
  /// excluded from the count.
  AbstainMode abstain_mode = AbstainMode::ReservedBucket;
};

/// nullopt = the model abstains on this instance.
std::optional<double> guard_score(const GuardedModel& model,
                                  const FeatureSchema& schema,
                                  const Instance& inst);

/// ScoreFn over encoded vectors (decodes to check the raw-space guards).
ScoreFn make_guarded_score_fn(const GuardedModel& model,
                              const FeatureSchema& schema);

/// For each record, append all K counterfactuals labeled by the majority
/// predicted label over the record's counterfactual set (ties go to the
/// favorable label); duplicates by encoded vector are dropped.
Dataset augment_dataset(const Dataset& data,
                        const std::vector<DiscriminationRecord>& discriminatory,
                        const FeatureSchema& schema, const Network& net);

struct FineTuneConfig {
  std::size_t epochs = 5;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::uint64_t rng_seed = 0;
};

/// Minibatch SGD with explicit backpropagation (logistic loss for one
/// output, softmax cross-entropy otherwise). Returns a new network;
/// deterministic given the seed.
Network fine_tune(const Network& net, const Dataset& data,
                  const FeatureSchema& schema, const FineTuneConfig& config);

/// Per-sample loss gradient for every weight/bias, flattened layer by layer
/// (weights row-major, then bias). Exposed for gradient checking.
Vector loss_gradient(const Network& net, const Vector& input, std::size_t label);
double loss_value(const Network& net, const Vector& input, std::size_t label);

double accuracy(const Network& net, const FeatureSchema& schema,
                const Dataset& data);

struct MitigationRow {
  std::string variant;  // original | original+dt | debiased | debiased+dt
  double accuracy_percent = 0.0;
  SearchReport search;
};

struct MitigationReport {
  std::vector<MitigationRow> rows;
  double accuracy_delta = 0.0;  // debiased minus original, percentage points
};

struct MitigateConfig {
  SearchConfig search;
  FineTuneConfig fine_tune;
  GuardPolicy policy = GuardPolicy::Abstain;
  AbstainMode abstain_mode = AbstainMode::ReservedBucket;
  bool retrain = true;  // off: guards-only comparison
};

/// Identical-seed searches over the four model variants plus held-out
/// accuracy for each.
MitigationReport evaluate_mitigation(const Network& original,
                                     const std::optional<Network>& debiased,
                                     const std::vector<ExplanationPredicate>& guards,
                                     const FeatureSchema& schema,
                                     const Dataset& search_data,
                                     const Dataset& holdout,
                                     const MitigateConfig& config);

}  // namespace kfair
