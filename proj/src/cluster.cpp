#include "kfair/cluster.hpp"

#include <algorithm>
#include <cmath>

#include "kfair/errors.hpp"

namespace kfair {

ScoreFn make_score_fn(const Network& net) {
  return [&net](const Vector& encoded) -> std::optional<double> {
    return score(net, encoded);
  };
}

std::size_t num_buckets(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw InputError("epsilon must be in (0, 1], got " +
                     std::to_string(epsilon));
  }
  return static_cast<std::size_t>(std::ceil(1.0 / epsilon));
}

std::size_t bucketize(double score, double epsilon) {
  const std::size_t buckets = num_buckets(epsilon);
  if (!(score >= 0.0 && score <= 1.0)) {
    throw InputError("score must be in [0, 1], got " + std::to_string(score));
  }
  const auto raw = static_cast<std::size_t>(std::floor(score / epsilon));
  return std::min(raw, buckets - 1);
}

bool is_2_discriminant(double score_a, double score_b, double epsilon) {
  // Strict inequality, with a representation-noise guard so that gaps equal
  // to epsilon in decimal (e.g. |0.55 - 0.5| vs 0.05) stay non-discriminant.
  return std::abs(score_a - score_b) > epsilon + 1e-12;
}

std::pair<std::vector<std::size_t>, std::size_t> cluster_scores(
    const std::vector<std::optional<double>>& scores, double epsilon,
    AbstainMode abstain) {
  const std::size_t reserved = num_buckets(epsilon);  // one past the last
  std::vector<std::size_t> buckets;
  buckets.reserve(scores.size());
  for (const auto& s : scores) {
    if (s.has_value()) {
      buckets.push_back(bucketize(*s, epsilon));
    } else if (abstain == AbstainMode::ReservedBucket) {
      buckets.push_back(reserved);
    } else {
      buckets.push_back(SIZE_MAX);  // excluded from the count
    }
  }
  std::vector<std::size_t> distinct;
  for (std::size_t b : buckets) {
    if (b == SIZE_MAX) continue;
    if (std::find(distinct.begin(), distinct.end(), b) == distinct.end()) {
      distinct.push_back(b);
    }
  }
  // All counterfactuals excluded still counts as one (uniform) treatment.
  return {std::move(buckets), std::max<std::size_t>(distinct.size(), 1)};
}

DiscriminationRecord k_discrimination_encoded(const ScoreFn& fn,
                                              const FeatureSchema& schema,
                                              const Instance& inst,
                                              Vector encoded, double epsilon,
                                              AbstainMode abstain) {
  DiscriminationRecord rec;
  rec.instance = inst;
  rec.counterfactual_scores.reserve(schema.K());
  for (std::size_t k = 0; k < schema.K(); ++k) {
    schema.apply_combo(encoded, k);
    rec.counterfactual_scores.push_back(fn(encoded));
  }
  auto [buckets, kv] = cluster_scores(rec.counterfactual_scores, epsilon, abstain);
  rec.bucket_indices = std::move(buckets);
  rec.k_value = kv;
  rec.is_id = rec.k_value >= 2;
  return rec;
}

DiscriminationRecord k_discrimination(const ScoreFn& fn,
                                      const FeatureSchema& schema,
                                      const Instance& inst, double epsilon,
                                      AbstainMode abstain) {
  return k_discrimination_encoded(fn, schema, inst, schema.encode(inst),
                                  epsilon, abstain);
}

DiscriminationRecord k_discrimination(const Network& net,
                                      const FeatureSchema& schema,
                                      const Instance& inst, double epsilon) {
  return k_discrimination(make_score_fn(net), schema, inst, epsilon);
}

}  // namespace kfair
