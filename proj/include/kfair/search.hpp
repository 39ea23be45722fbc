#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kfair/cluster.hpp"
#include "kfair/data.hpp"
#include "kfair/milp.hpp"
#include "kfair/model.hpp"
#include "kfair/rng.hpp"
#include "kfair/schema.hpp"

namespace kfair {

enum class SearchStrategy { RandomWalk, SimulatedAnnealing, SimulatedAnnealingKnn };

std::string strategy_name(SearchStrategy s);
std::optional<SearchStrategy> parse_strategy(const std::string& name);

struct SearchConfig {
  SearchStrategy strategy = SearchStrategy::SimulatedAnnealing;
  double epsilon = 0.05;
  double timeout_seconds = 14400.0;  // 4 h default search budget
  /// Optional deterministic stopping point; wall-clock cuts cannot reproduce
  /// byte-identical reports, an iteration bound can.
  std::optional<std::uint64_t> max_iterations;
  double p_exploit = 0.9;
  double temperature_initial = 1.0;
  double temperature_decay = 0.995;
  double temperature_floor = 1e-3;
  std::uint64_t stagnation_limit = 50;  // non-improving iters before re-seed
  std::size_t knn_neighbors = 5;
  std::uint64_t rng_seed = 0;
  /// Stop as soon as this k is reached (used by time-to-target experiments).
  std::optional<std::size_t> target_k;
  bool use_solver = true;
  double solver_timeout_seconds = 100.0;  // per MILP query
  double seed_radius = 0.2;
  std::size_t max_best_instances = 32;
  std::size_t max_recorded_ids = 10000;  // cap on the per-ID record list
};

struct SearchReport {
  std::string strategy;
  std::uint64_t iterations = 0;
  std::size_t max_k = 1;
  double avg_k = 0.0;  // mean k over unique discriminatory instances
  std::uint64_t num_id = 0;
  double success_rate = 0.0;  // percent: unique IDs / generated candidates
  std::uint64_t num_id_max_k = 0;
  std::uint64_t candidates_generated = 0;
  std::uint64_t solver_queries = 0;
  std::uint64_t solver_hits = 0;
  std::uint64_t degraded_restarts = 0;  // solver gave nothing; random restart
  bool reached_target = false;
  std::vector<DiscriminationRecord> best_instances;  // at max_k, capped
  std::vector<std::pair<Instance, std::size_t>> ids;  // unique IDs with k, capped

  // Deterministic positions of the two milestones.
  std::optional<std::uint64_t> iter_first_id;
  std::optional<std::uint64_t> iter_max_k;
  // Wall-clock milestones; excluded from byte-level report comparison.
  std::optional<double> t_first_id_seconds;
  std::optional<double> t_max_k_seconds;
  double elapsed_seconds = 0.0;
};

/// One uniformly chosen non-protected feature mutated: numerics move one
/// step (integral: 1 unit, continuous: 1% of range, direction uniform,
/// clamped), categoricals resample among the other labels.
Instance propose_neighbor(const Instance& current, const FeatureSchema& schema,
                          Rng& rng);

/// Metropolis acceptance on integer fitness: always accept k_candidate >=
/// k_current, otherwise with probability exp((k_candidate-k_current)/T).
bool accept_metropolis(std::size_t k_current, std::size_t k_candidate,
                       double temperature, Rng& rng);

/// Brute-force Euclidean nearest neighbors over encoded dataset rows.
class KnnIndex {
 public:
  KnnIndex() = default;
  KnnIndex(const Dataset& data, const FeatureSchema& schema);
  std::vector<std::size_t> nearest(const Vector& encoded, std::size_t k) const;
  bool empty() const { return encodings_.empty(); }

 private:
  std::vector<Vector> encodings_;
};

/// Next candidate per search type; explore branches fall back to
/// schema.random_instance when the dataset is empty.
Instance pick_candidate_source(SearchStrategy strategy, const Instance& current,
                               const Dataset& dataset, const KnnIndex& knn,
                               std::size_t knn_neighbors, double p_exploit,
                               const FeatureSchema& schema, Rng& rng);

/// Full search run on a plain network (scores via model::score).
SearchReport run_search(const Network& net, const FeatureSchema& schema,
                        const Dataset& dataset, const SearchConfig& config);

/// Variant with a custom scoring hook (e.g. a guarded model). The MILP
/// re-seeding still queries `net`, the raw network under audit.
SearchReport run_search_scored(const Network& net, const ScoreFn& score_fn,
                               AbstainMode abstain, const FeatureSchema& schema,
                               const Dataset& dataset,
                               const SearchConfig& config);

}  // namespace kfair
