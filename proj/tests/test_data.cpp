#include "doctest.h"

#include <set>

#include "fixtures.hpp"
#include "kfair/cluster.hpp"
#include "kfair/data.hpp"
#include "kfair/errors.hpp"
#include "oracle.hpp"

using namespace kfair;

namespace {

const char* kCsvHeader = "age,hours,workclass,sex,race";

FeatureSchema csv_schema() {
  return parse_schema_json(R"({
    "features": [
      {"name": "age", "kind": "numeric", "lower": 0, "upper": 100, "integral": true, "protected": false},
      {"name": "hours", "kind": "numeric", "lower": 0, "upper": 80, "protected": false},
      {"name": "workclass", "kind": "categorical", "values": ["private", "gov", "self"], "protected": false},
      {"name": "sex", "kind": "categorical", "values": ["female", "male"], "protected": true},
      {"name": "race", "kind": "categorical", "values": ["r0", "r1"], "protected": true}
    ]
  })");
}

}  // namespace

TEST_CASE("load_csv parses well-formed rows") {
  const FeatureSchema schema = csv_schema();
  const std::string text = std::string(kCsvHeader) +
                           "\n"
                           "25,40,private,female,r0\n"
                           "52,20,\"gov\",male,r1\n"
                           "33,60,self,female,r1\n";
  const Dataset data = parse_csv(text, schema);
  REQUIRE(data.size() == 3);
  CHECK_FALSE(data.has_labels());
  CHECK(std::get<double>(data.rows[1].values[0]) == 52.0);
  CHECK(std::get<std::size_t>(data.rows[1].values[2]) == 1);
}

TEST_CASE("load_csv: optional label column") {
  const FeatureSchema schema = csv_schema();
  const std::string text = std::string(kCsvHeader) + ",label\n" +
                           "25,40,private,female,r0,1\n"
                           "52,20,gov,male,r1,0\n";
  const Dataset data = parse_csv(text, schema);
  REQUIRE(data.has_labels());
  CHECK(data.labels == std::vector<std::size_t>{1, 0});
}

TEST_CASE("load_csv errors name the row and feature") {
  const FeatureSchema schema = csv_schema();
  // Value outside numeric bounds.
  const std::string bad_domain = std::string(kCsvHeader) +
                                 "\n25,40,private,female,r0\n"
                                 "150,40,private,female,r0\n";
  try {
    parse_csv(bad_domain, schema);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("age") != std::string::npos);
  }
  // Unparseable numeric cell.
  CHECK_THROWS_AS(
      parse_csv(std::string(kCsvHeader) + "\nabc,40,private,female,r0\n", schema),
      InputError);
  // Missing column.
  CHECK_THROWS_AS(parse_csv("age,hours,workclass,sex\n25,40,private,female\n",
                            schema),
                  InputError);
  // Unknown label.
  CHECK_THROWS_AS(
      parse_csv(std::string(kCsvHeader) + "\n25,40,private,female,r9\n", schema),
      InputError);
}

TEST_CASE("csv round-trips through save") {
  const FeatureSchema schema = csv_schema();
  const Network net = [&] {
    Rng rng(5);
    return testing::random_network(rng, schema.encoded_width(), {4}, 1);
  }();
  const Dataset data = sample_labeled_dataset(schema, net, 50, 7);
  save_csv(data, schema, "/tmp/kfair_test_roundtrip.csv");
  const Dataset back = load_csv("/tmp/kfair_test_roundtrip.csv", schema);
  REQUIRE(back.size() == data.size());
  REQUIRE(back.labels == data.labels);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(schema.encode(back.rows[i]) == schema.encode(data.rows[i]));
  }
}

TEST_CASE("train_test_split: reproducible disjoint partition") {
  const FeatureSchema schema = csv_schema();
  Rng rng(12);
  Dataset data;
  for (int i = 0; i < 10; ++i) {
    data.rows.push_back(schema.random_instance(rng));
    data.labels.push_back(i % 2);
  }
  auto [a, b] = train_test_split(data, 0.8, 99);
  CHECK(a.size() == 8);
  CHECK(b.size() == 2);

  auto [a2, b2] = train_test_split(data, 0.8, 99);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(schema.encode(a.rows[i]) == schema.encode(a2.rows[i]));
  }

  // Union is the original multiset (compare sorted encodings).
  auto key_of = [&](const Instance& inst) {
    std::string k;
    for (double v : schema.encode(inst)) k += std::to_string(v) + "|";
    return k;
  };
  std::multiset<std::string> orig, parts;
  for (const auto& r : data.rows) orig.insert(key_of(r));
  for (const auto& r : a.rows) parts.insert(key_of(r));
  for (const auto& r : b.rows) parts.insert(key_of(r));
  CHECK(orig == parts);

  CHECK_THROWS_AS(train_test_split(data, 0.01, 1), InputError);
}

TEST_CASE("planted network: offsets realized exactly inside the region") {
  const auto bundle = testing::planted_bundle(2, 2);
  // Overwrite offsets with an asymmetric pair for this check.
  PlantSpec plant = bundle.plant;
  plant.offsets = {0.0, 0.3};
  const Network net = make_planted_network(bundle.schema, plant);

  // Grid over the region interior: score == base + offset for both combos.
  for (double x0 : {0.31, 0.4, 0.5, 0.69}) {
    for (double x1 : {0.31, 0.55, 0.69}) {
      for (std::size_t g : {0, 1}) {
        const Instance inst = testing::instance_at(bundle.schema, x0, x1, g);
        const double s = oracle::score_reference(net, bundle.schema.encode(inst));
        CHECK(s == doctest::Approx(plant.base_score + plant.offsets[g])
                       .epsilon(1e-9));
      }
    }
  }
  // k with epsilon 0.05 is 2 inside.
  const Instance inside = testing::instance_at(bundle.schema, 0.5, 0.5, 0);
  CHECK(k_discrimination(net, bundle.schema, inside, 0.05).k_value == 2);
}

TEST_CASE("planted network: 20 offsets spaced a bucket apart give max k 20") {
  const auto bundle = testing::planted_bundle(20, 20);
  const Instance inside = testing::instance_at(bundle.schema, 0.5, 0.5, 3);
  const auto rec = k_discrimination(bundle.net, bundle.schema, inside, 0.05);
  CHECK(rec.k_value == 20);

  // Brute-force grid inside the region reproduces the offset table.
  for (double x0 : {0.35, 0.5, 0.65}) {
    for (std::size_t c = 0; c < 20; ++c) {
      const Instance inst = testing::instance_at(bundle.schema, x0, 0.5, c);
      const double s =
          oracle::score_reference(bundle.net, bundle.schema.encode(inst));
      CHECK(std::abs(s - (bundle.plant.base_score + bundle.plant.offsets[c])) <=
            1e-6);
    }
  }
}

TEST_CASE("planted network: constant score outside the inflated region") {
  const auto bundle = testing::planted_bundle(8, 5);
  for (double x0 : {0.05, 0.2, 0.75, 0.95}) {
    for (std::size_t g = 0; g < 8; ++g) {
      const Instance inst = testing::instance_at(bundle.schema, x0, 0.1, g);
      const double s =
          oracle::score_reference(bundle.net, bundle.schema.encode(inst));
      CHECK(s == doctest::Approx(bundle.plant.base_score).epsilon(1e-9));
    }
  }
  const Instance outside = testing::instance_at(bundle.schema, 0.1, 0.1, 0);
  CHECK(k_discrimination(bundle.net, bundle.schema, outside, 0.05).k_value == 1);
}

TEST_CASE("plant spec validation") {
  const auto bundle = testing::planted_bundle(4, 2);
  PlantSpec bad = bundle.plant;
  bad.offsets.pop_back();
  CHECK_THROWS_AS(make_planted_network(bundle.schema, bad), InputError);

  bad = bundle.plant;
  bad.region[0].lower = 0.005;  // ramp would leave [0,1]
  CHECK_THROWS_AS(make_planted_network(bundle.schema, bad), InputError);

  bad = bundle.plant;
  bad.offsets[1] = 1.5;  // score escapes (0,1)
  CHECK_THROWS_AS(make_planted_network(bundle.schema, bad), InputError);
}
