#include "kfair/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "kfair/errors.hpp"

namespace kfair {

std::string strategy_name(SearchStrategy s) {
  switch (s) {
    case SearchStrategy::RandomWalk: return "rw";
    case SearchStrategy::SimulatedAnnealing: return "sa";
    case SearchStrategy::SimulatedAnnealingKnn: return "sa-knn";
  }
  return "?";
}

std::optional<SearchStrategy> parse_strategy(const std::string& name) {
  if (name == "rw") return SearchStrategy::RandomWalk;
  if (name == "sa") return SearchStrategy::SimulatedAnnealing;
  if (name == "sa-knn") return SearchStrategy::SimulatedAnnealingKnn;
  return std::nullopt;
}

Instance propose_neighbor(const Instance& current, const FeatureSchema& schema,
                          Rng& rng) {
  const auto& free_feats = schema.non_protected_indices();
  if (free_feats.empty()) return current;
  Instance next = current;
  const std::size_t fi = free_feats[rng.uniform_index(free_feats.size())];
  const FeatureSpec& f = schema.feature(fi);
  if (f.numeric()) {
    const NumericKind& n = f.num();
    const double step = n.integral ? 1.0 : 0.01 * (n.upper - n.lower);
    const double dir = rng.bernoulli(0.5) ? 1.0 : -1.0;
    double v = std::get<double>(current.values[fi]) + dir * step;
    v = std::clamp(v, n.lower, n.upper);
    if (n.integral) v = std::round(v);
    next.values[fi] = v;
  } else {
    const std::size_t n_labels = f.cat().labels.size();
    const std::size_t cur = std::get<std::size_t>(current.values[fi]);
    std::size_t pick = rng.uniform_index(n_labels - 1);
    if (pick >= cur) ++pick;  // uniform among the other labels
    next.values[fi] = pick;
  }
  return next;
}

bool accept_metropolis(std::size_t k_current, std::size_t k_candidate,
                       double temperature, Rng& rng) {
  if (k_candidate >= k_current) return true;
  if (!(temperature > 0.0)) throw InputError("temperature must be positive");
  const double delta = static_cast<double>(k_candidate) -
                       static_cast<double>(k_current);
  return rng.uniform() < std::exp(delta / temperature);
}

KnnIndex::KnnIndex(const Dataset& data, const FeatureSchema& schema) {
  encodings_.reserve(data.rows.size());
  for (const Instance& inst : data.rows) {
    encodings_.push_back(schema.encode(inst));
  }
}

std::vector<std::size_t> KnnIndex::nearest(const Vector& encoded,
                                           std::size_t k) const {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(encodings_.size());
  for (std::size_t i = 0; i < encodings_.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < encoded.size(); ++c) {
      const double d = encodings_[i][c] - encoded[c];
      d2 += d * d;
    }
    dist.emplace_back(d2, i);
  }
  const std::size_t take = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + take, dist.end());
  std::vector<std::size_t> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(dist[i].second);
  return out;
}

Instance pick_candidate_source(SearchStrategy strategy, const Instance& current,
                               const Dataset& dataset, const KnnIndex& knn,
                               std::size_t knn_neighbors, double p_exploit,
                               const FeatureSchema& schema, Rng& rng) {
  auto random_row = [&]() -> Instance {
    if (dataset.rows.empty()) return schema.random_instance(rng);
    return dataset.rows[rng.uniform_index(dataset.rows.size())];
  };
  switch (strategy) {
    case SearchStrategy::RandomWalk:
      return propose_neighbor(current, schema, rng);
    case SearchStrategy::SimulatedAnnealing:
      if (rng.bernoulli(p_exploit)) return propose_neighbor(current, schema, rng);
      return random_row();
    case SearchStrategy::SimulatedAnnealingKnn: {
      if (rng.bernoulli(p_exploit) && !knn.empty()) {
        const auto ids = knn.nearest(schema.encode(current), knn_neighbors);
        return dataset.rows[ids[rng.uniform_index(ids.size())]];
      }
      return random_row();
    }
  }
  return current;
}

namespace {

/// Dedup key: the encoded vector rounded to 9 decimals.
std::string id_key(const Vector& encoded) {
  std::string key;
  key.reserve(encoded.size() * 13);
  char buf[32];
  for (double v : encoded) {
    std::snprintf(buf, sizeof(buf), "%.9f|", v);
    key += buf;
  }
  return key;
}

class SearchRun {
 public:
  SearchRun(const Network& net, const ScoreFn& score_fn, AbstainMode abstain,
            const FeatureSchema& schema, const Dataset& dataset,
            const SearchConfig& config)
      : net_(net),
        score_fn_(score_fn),
        abstain_(abstain),
        schema_(schema),
        dataset_(dataset),
        config_(config),
        rng_(split_seed(config.rng_seed, 0x5eaec4)) {
    if (config_.strategy == SearchStrategy::SimulatedAnnealingKnn &&
        !dataset_.rows.empty()) {
      knn_ = KnnIndex(dataset_, schema_);
    }
    report_.strategy = strategy_name(config_.strategy);
  }

  SearchReport run() {
    start_ = std::chrono::steady_clock::now();
    temperature_ = config_.temperature_initial;

    Instance current = initial_seed();
    std::size_t k_current = evaluate(current).k_value;

    std::uint64_t since_improvement = 0;
    std::size_t best_seen = report_.max_k;
    while (!done()) {
      ++report_.iterations;
      Instance candidate =
          pick_candidate_source(config_.strategy, current, dataset_, knn_,
                                config_.knn_neighbors, config_.p_exploit,
                                schema_, rng_);
      const DiscriminationRecord rec = evaluate(candidate);
      if (report_.reached_target) break;

      bool accept = true;
      if (config_.strategy != SearchStrategy::RandomWalk) {
        accept = accept_metropolis(k_current, rec.k_value, temperature_, rng_);
      }
      if (accept) {
        current = std::move(candidate);
        k_current = rec.k_value;
      }
      temperature_ = std::max(config_.temperature_floor,
                              temperature_ * config_.temperature_decay);

      if (report_.max_k > best_seen) {
        best_seen = report_.max_k;
        since_improvement = 0;
      } else if (++since_improvement >= config_.stagnation_limit) {
        // Plateau: ask the solver for a fresh 2-discriminant elsewhere.
        current = reseed();
        k_current = evaluate(current).k_value;
        temperature_ = config_.temperature_initial;
        since_improvement = 0;
      }
    }

    finalize();
    return report_;
  }

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

  bool done() const {
    if (report_.reached_target) return true;
    if (config_.max_iterations && report_.iterations >= *config_.max_iterations) {
      return true;
    }
    return elapsed() >= config_.timeout_seconds;
  }

  Instance random_source() {
    if (dataset_.rows.empty()) return schema_.random_instance(rng_);
    return dataset_.rows[rng_.uniform_index(dataset_.rows.size())];
  }

  Instance initial_seed() {
    Instance seed = random_source();
    if (config_.use_solver) {
      auto hit = query_solver(seed);
      if (hit) return *hit;
      ++report_.degraded_restarts;
    }
    return seed;
  }

  Instance reseed() {
    Instance seed = random_source();
    if (config_.use_solver) {
      auto hit = query_solver(seed);
      if (hit) return *hit;
      ++report_.degraded_restarts;
    }
    return seed;
  }

  std::optional<Instance> query_solver(const Instance& near) {
    ++report_.solver_queries;
    CertifyConfig cfg;
    cfg.solve.timeout_seconds = config_.solver_timeout_seconds;
    cfg.seed_radius = config_.seed_radius;
    auto hit = seed_counterexample(net_, schema_, config_.epsilon, near, cfg);
    if (hit) ++report_.solver_hits;
    return hit;
  }

  DiscriminationRecord evaluate(const Instance& inst) {
    ++report_.candidates_generated;
    Vector encoded = schema_.encode(inst);
    const std::string key = id_key(encoded);
    DiscriminationRecord rec = k_discrimination_encoded(
        score_fn_, schema_, inst, std::move(encoded), config_.epsilon, abstain_);
    if (rec.is_id) {
      record_id(key, rec);
    }
    return rec;
  }

  void record_id(const std::string& key, const DiscriminationRecord& rec) {
    const auto [it, inserted] = id_k_.emplace(key, rec.k_value);
    if (inserted) {
      ++report_.num_id;
      k_sum_ += static_cast<double>(rec.k_value);
      if (report_.ids.size() < config_.max_recorded_ids) {
        report_.ids.emplace_back(rec.instance, rec.k_value);
      }
      if (!report_.iter_first_id) {
        report_.iter_first_id = report_.iterations;
        report_.t_first_id_seconds = elapsed();
      }
    }
    if (rec.k_value > report_.max_k) {
      report_.max_k = rec.k_value;
      report_.iter_max_k = report_.iterations;
      report_.t_max_k_seconds = elapsed();
      report_.best_instances.clear();
      best_keys_.clear();
    }
    if (rec.k_value == report_.max_k &&
        report_.best_instances.size() < config_.max_best_instances &&
        best_keys_.emplace(key, true).second) {
      report_.best_instances.push_back(rec);
    }
    if (config_.target_k && report_.max_k >= *config_.target_k) {
      report_.reached_target = true;
    }
  }

  void finalize() {
    report_.elapsed_seconds = elapsed();
    if (report_.num_id > 0) {
      report_.avg_k = k_sum_ / static_cast<double>(report_.num_id);
    }
    if (report_.candidates_generated > 0) {
      report_.success_rate = 100.0 * static_cast<double>(report_.num_id) /
                             static_cast<double>(report_.candidates_generated);
    }
    for (const auto& [key, k] : id_k_) {
      (void)key;
      if (k == report_.max_k) ++report_.num_id_max_k;
    }
  }

  const Network& net_;
  const ScoreFn& score_fn_;
  AbstainMode abstain_;
  const FeatureSchema& schema_;
  const Dataset& dataset_;
  const SearchConfig& config_;
  Rng rng_;
  KnnIndex knn_;
  SearchReport report_;
  double temperature_ = 1.0;
  double k_sum_ = 0.0;
  std::unordered_map<std::string, std::size_t> id_k_;
  std::unordered_map<std::string, bool> best_keys_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

SearchReport run_search_scored(const Network& net, const ScoreFn& score_fn,
                               AbstainMode abstain, const FeatureSchema& schema,
                               const Dataset& dataset,
                               const SearchConfig& config) {
  if (dataset.rows.empty() && schema.non_protected_indices().empty()) {
    throw InputError("search needs a dataset or a samplable schema");
  }
  if (config.p_exploit < 0.0 || config.p_exploit > 1.0) {
    throw InputError("p_exploit must be in [0, 1]");
  }
  if (!(config.temperature_decay > 0.0 && config.temperature_decay < 1.0)) {
    throw InputError("temperature_decay must be in (0, 1)");
  }
  SearchRun run(net, score_fn, abstain, schema, dataset, config);
  return run.run();
}

SearchReport run_search(const Network& net, const FeatureSchema& schema,
                        const Dataset& dataset, const SearchConfig& config) {
  const ScoreFn fn = make_score_fn(net);
  return run_search_scored(net, fn, AbstainMode::ReservedBucket, schema,
                           dataset, config);
}

}  // namespace kfair
