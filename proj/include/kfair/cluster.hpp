#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "kfair/model.hpp"
#include "kfair/schema.hpp"

namespace kfair {

/// Scoring hook: encoded input -> normalized score, or nullopt when a
/// guardrail abstains. Plain networks never abstain.
using ScoreFn = std::function<std::optional<double>(const Vector&)>;

ScoreFn make_score_fn(const Network& net);

/// How abstained counterfactual outcomes enter the bucket count.
enum class AbstainMode { ReservedBucket, Exclude };

/// Number of uniform buckets over [0,1]: ceil(1/epsilon).
std::size_t num_buckets(double epsilon);

/// Uniform bucket index: min(floor(score/eps), ceil(1/eps)-1).
std::size_t bucketize(double score, double epsilon);

/// Strict pairwise 2-discrimination test: |a - b| > epsilon.
bool is_2_discriminant(double score_a, double score_b, double epsilon);

struct DiscriminationRecord {
  Instance instance;
  std::vector<std::optional<double>> counterfactual_scores;  // length K
  std::vector<std::size_t> bucket_indices;                   // length K
  std::size_t k_value = 1;
  bool is_id = false;  // k_value >= 2
};

/// Bucket the K counterfactual scores and count distinct buckets.
/// Scores must be present unless a guarded ScoreFn is in play.
std::pair<std::vector<std::size_t>, std::size_t> cluster_scores(
    const std::vector<std::optional<double>>& scores, double epsilon,
    AbstainMode abstain = AbstainMode::ReservedBucket);

/// Full record for one instance under `fn` (pre-encoded form).
DiscriminationRecord k_discrimination_encoded(
    const ScoreFn& fn, const FeatureSchema& schema, const Instance& inst,
    Vector encoded, double epsilon,
    AbstainMode abstain = AbstainMode::ReservedBucket);

DiscriminationRecord k_discrimination(
    const ScoreFn& fn, const FeatureSchema& schema, const Instance& inst,
    double epsilon, AbstainMode abstain = AbstainMode::ReservedBucket);

DiscriminationRecord k_discrimination(const Network& net,
                                      const FeatureSchema& schema,
                                      const Instance& inst, double epsilon);

}  // namespace kfair
