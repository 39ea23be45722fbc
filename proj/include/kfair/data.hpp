#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kfair/model.hpp"
#include "kfair/schema.hpp"

namespace kfair {

struct Dataset {
  std::vector<Instance> rows;
  std::vector<std::size_t> labels;  // empty when the file has no label column

  bool has_labels() const { return !labels.empty(); }
  std::size_t size() const { return rows.size(); }
};

/// Comma-separated, first row header matching feature names (plus an optional
/// "label" column), UTF-8, double-quoted fields allowed. Every row is
/// validated against the schema; errors name the line and feature.
Dataset load_csv(const std::string& path, const FeatureSchema& schema);
Dataset parse_csv(const std::string& text, const FeatureSchema& schema);
void save_csv(const Dataset& data, const FeatureSchema& schema,
              const std::string& path);

/// Reproducible shuffle split; first part gets round(fraction * n) rows.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             double fraction,
                                             std::uint64_t seed);

/// Axis-aligned target region over non-protected features, in encoded [0,1]
/// units.
struct PlantRegion {
  std::size_t feature = 0;
  double lower = 0.0;
  double upper = 1.0;
};

/// Additional nested stage: strictly inside `region`, the score table
/// becomes base_score + offsets[combo] for this stage instead of the
/// enclosing one's. Regions must nest with ramp margins.
struct PlantStage {
  std::vector<PlantRegion> region;
  std::vector<double> offsets;
};

/// Ground-truth plan for a synthetic network: inside the region the
/// normalized score equals base_score + offsets[combo]; outside (beyond the
/// boundary ramps) it equals base_score everywhere. Optional nested stages
/// raise (or change) the score table further toward the center, giving the
/// search a k gradient to climb.
struct PlantSpec {
  std::vector<PlantRegion> region;
  std::vector<double> offsets;  // one per protected combination
  double base_score = 0.025;
  double ramp_width = 0.02;  // encoded units, outside the region proper
  std::vector<PlantStage> extra_stages;  // innermost last
};

/// Builds the planted network with ReLU gate/indicator constructions so that
/// the score surface (and hence max k) is known analytically.
Network make_planted_network(const FeatureSchema& schema, const PlantSpec& plant);

/// True iff the instance's encoded non-protected coordinates lie inside the
/// planted region (strictly, i.e. not in the boundary ramp shell).
bool inside_plant_region(const FeatureSchema& schema, const PlantSpec& plant,
                         const Instance& inst);

/// Stage 0 is the base region; stage s >= 1 indexes extra_stages[s-1].
bool inside_plant_stage(const FeatureSchema& schema, const PlantSpec& plant,
                        std::size_t stage, const Instance& inst);

/// Random dataset labeled by the network's own predictions.
Dataset sample_labeled_dataset(const FeatureSchema& schema, const Network& net,
                               std::size_t n, std::uint64_t seed);

}  // namespace kfair
