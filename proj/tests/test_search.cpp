#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "kfair/data.hpp"
#include "kfair/search.hpp"

using namespace kfair;

namespace {

Dataset uniform_dataset(const FeatureSchema& schema, std::size_t n,
                        std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    data.rows.push_back(schema.random_instance(rng));
  }
  return data;
}

}  // namespace

TEST_CASE("propose_neighbor mutates exactly one non-protected feature") {
  const FeatureSchema schema = testing::categorical_schema({3, 4}, {2});
  Rng rng(1);
  const Instance base = schema.random_instance(rng);
  for (int i = 0; i < 200; ++i) {
    const Instance next = propose_neighbor(base, schema, rng);
    std::size_t changed = 0;
    for (std::size_t f = 0; f < base.values.size(); ++f) {
      const bool same = schema.feature(f).numeric()
                            ? std::get<double>(base.values[f]) ==
                                  std::get<double>(next.values[f])
                            : std::get<std::size_t>(base.values[f]) ==
                                  std::get<std::size_t>(next.values[f]);
      if (!same) {
        ++changed;
        CHECK_FALSE(schema.feature(f).is_protected);
      }
    }
    // Categorical mutations always move to a different label.
    CHECK(changed == 1);
  }
}

TEST_CASE("propose_neighbor clamps numerics at the domain bounds") {
  const FeatureSchema schema = testing::tiny_schema();
  Instance inst;
  inst.values = {FeatureValue{1.0}, FeatureValue{std::size_t{0}}};
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Instance next = propose_neighbor(inst, schema, rng);
    const double v = std::get<double>(next.values[0]);
    CHECK(v <= 1.0);
    CHECK(v >= 0.98);  // one percent step size
  }
}

TEST_CASE("propose_neighbor picks features uniformly (chi-square)") {
  // 4 non-protected features; 10k proposals; chi-square with 3 dof.
  const FeatureSchema schema = testing::categorical_schema({2, 2, 2, 2}, {2});
  Rng rng(17);
  const Instance base = schema.random_instance(rng);
  std::vector<double> counts(4, 0.0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Instance next = propose_neighbor(base, schema, rng);
    for (std::size_t f = 0; f < 4; ++f) {
      const bool same = std::get<std::size_t>(base.values[f]) ==
                        std::get<std::size_t>(next.values[f]);
      if (!same) counts[f] += 1.0;
    }
  }
  const double expected = n / 4.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 < 16.27);  // 99.9th percentile of chi-square with 3 dof
}

TEST_CASE("accept_metropolis: equal or better always accepted") {
  Rng rng(5);
  for (std::size_t k = 1; k <= 5; ++k) {
    CHECK(accept_metropolis(k, k, 0.5, rng));
    CHECK(accept_metropolis(k, k + 1, 0.5, rng));
  }
}

TEST_CASE("accept_metropolis: downhill rate matches exp(-1/T)") {
  Rng rng(7);
  int accepted = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    accepted += accept_metropolis(3, 2, 1.0, rng) ? 1 : 0;
  }
  const double rate = static_cast<double>(accepted) / n;
  CHECK(rate == doctest::Approx(std::exp(-1.0)).epsilon(0.06));

  // Near-zero temperature kills downhill moves.
  int cold = 0;
  for (int i = 0; i < n; ++i) {
    cold += accept_metropolis(3, 2, 1e-6, rng) ? 1 : 0;
  }
  CHECK(cold == 0);
}

TEST_CASE("pick_candidate_source honors the strategy contracts") {
  const FeatureSchema schema = testing::tiny_schema();
  Dataset data = uniform_dataset(schema, 20, 11);
  const KnnIndex knn(data, schema);
  Rng rng(13);
  const Instance current = schema.random_instance(rng);

  // SA with p = 1: always a neighborhood move, so the candidate differs from
  // the current instance in at most one feature (zero on a boundary clamp).
  for (int i = 0; i < 50; ++i) {
    const Instance cand = pick_candidate_source(
        SearchStrategy::SimulatedAnnealing, current, data, knn, 5, 1.0, schema,
        rng);
    std::size_t changed = 0;
    for (std::size_t f = 0; f < cand.values.size(); ++f) {
      if (schema.feature(f).numeric()) {
        changed += std::get<double>(cand.values[f]) !=
                   std::get<double>(current.values[f]);
      } else {
        changed += std::get<std::size_t>(cand.values[f]) !=
                   std::get<std::size_t>(current.values[f]);
      }
    }
    CHECK(changed <= 1);
  }

  // SA+KNN with a single neighbor and p = 1: always that nearest row.
  const auto nearest = knn.nearest(schema.encode(current), 1);
  for (int i = 0; i < 20; ++i) {
    const Instance cand = pick_candidate_source(
        SearchStrategy::SimulatedAnnealingKnn, current, data, knn, 1, 1.0,
        schema, rng);
    CHECK(schema.encode(cand) == schema.encode(data.rows[nearest[0]]));
  }
}

TEST_CASE("exploit/explore ratio approximates p_exploit") {
  // Continuous feature: dataset rows are almost surely distinct, so explore
  // draws rarely collide with the 5 nearest rows (5/500 of the time).
  const FeatureSchema schema = testing::tiny_schema();
  Dataset data = uniform_dataset(schema, 500, 19);
  const KnnIndex knn(data, schema);
  Rng rng(23);
  Instance current = schema.random_instance(rng);
  // Count draws that used the rng's bernoulli-true branch by reproducing the
  // stream: instead, statistically check the KNN variant, whose exploit
  // branch returns one of the 5 nearest rows.
  const auto near5 = knn.nearest(schema.encode(current), 5);
  int exploit = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Instance cand =
        pick_candidate_source(SearchStrategy::SimulatedAnnealingKnn, current,
                              data, knn, 5, 0.9, schema, rng);
    const Vector e = schema.encode(cand);
    for (std::size_t id : near5) {
      if (e == schema.encode(data.rows[id])) {
        ++exploit;
        break;
      }
    }
  }
  const double ratio = static_cast<double>(exploit) / n;
  // Explore draws can also hit a near row by chance, so allow upward slack.
  CHECK(ratio >= 0.89);
  CHECK(ratio <= 0.92);
}

TEST_CASE("constant network search finds nothing") {
  const FeatureSchema schema = testing::tiny_schema();
  Network net;
  net.input_width = schema.encoded_width();
  net.output_width = 1;
  net.favorable_output_index = 0;
  DenseLayer o;
  o.activation = Activation::Identity;
  o.weights = Matrix(1, net.input_width);
  o.bias = {0.0};
  net.layers = {o};

  SearchConfig cfg;
  cfg.max_iterations = 2000;
  cfg.timeout_seconds = 30.0;
  cfg.use_solver = false;
  cfg.rng_seed = 42;
  const SearchReport r = run_search(net, schema, uniform_dataset(schema, 50, 3), cfg);
  CHECK(r.max_k == 1);
  CHECK(r.num_id == 0);
  CHECK(r.success_rate == 0.0);
  CHECK(r.iterations == 2000);
}

TEST_CASE("planted search: SA reaches the planted k") {
  const auto bundle = testing::planted_bundle(6, 5);
  const Dataset data = uniform_dataset(bundle.schema, 400, 77);
  SearchConfig cfg;
  cfg.strategy = SearchStrategy::SimulatedAnnealing;
  cfg.max_iterations = 30000;
  cfg.timeout_seconds = 120.0;
  cfg.rng_seed = 1;
  cfg.target_k = 5;
  cfg.solver_timeout_seconds = 20.0;
  const SearchReport r = run_search(bundle.net, bundle.schema, data, cfg);
  CHECK(r.max_k == 5);
  CHECK(r.reached_target);
  CHECK(r.num_id > 0);
  REQUIRE_FALSE(r.best_instances.empty());
  // Every best instance re-evaluates to max_k.
  for (const auto& rec : r.best_instances) {
    CHECK(k_discrimination(bundle.net, bundle.schema, rec.instance, 0.05)
              .k_value == r.max_k);
  }
}

TEST_CASE("reported ids re-validate independently") {
  const auto bundle = testing::planted_bundle(4, 3);
  const Dataset data = uniform_dataset(bundle.schema, 200, 5);
  SearchConfig cfg;
  cfg.max_iterations = 5000;
  cfg.timeout_seconds = 60.0;
  cfg.use_solver = false;  // pure randomized run
  cfg.rng_seed = 9;
  const SearchReport r = run_search(bundle.net, bundle.schema, data, cfg);
  for (const auto& [inst, k] : r.ids) {
    const auto rec = k_discrimination(bundle.net, bundle.schema, inst, 0.05);
    CHECK(rec.k_value == k);
    CHECK(rec.k_value >= 2);
  }
  // Timing fields are monotone when present.
  if (r.iter_first_id && r.iter_max_k) {
    CHECK(*r.iter_first_id <= *r.iter_max_k);
    CHECK(*r.t_first_id_seconds <= *r.t_max_k_seconds);
  }
}

TEST_CASE("identical seed and config give identical reports") {
  const auto bundle = testing::planted_bundle(4, 3);
  const Dataset data = uniform_dataset(bundle.schema, 100, 31);
  SearchConfig cfg;
  cfg.max_iterations = 3000;
  cfg.timeout_seconds = 60.0;
  cfg.use_solver = false;
  cfg.rng_seed = 123;
  const SearchReport a = run_search(bundle.net, bundle.schema, data, cfg);
  const SearchReport b = run_search(bundle.net, bundle.schema, data, cfg);
  CHECK(a.iterations == b.iterations);
  CHECK(a.max_k == b.max_k);
  CHECK(a.num_id == b.num_id);
  CHECK(a.avg_k == b.avg_k);
  CHECK(a.success_rate == b.success_rate);
  CHECK(a.num_id_max_k == b.num_id_max_k);
  CHECK(a.ids.size() == b.ids.size());
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    CHECK(bundle.schema.encode(a.ids[i].first) ==
          bundle.schema.encode(b.ids[i].first));
  }
}
