#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kfair/model.hpp"
#include "kfair/rng.hpp"

namespace kfair {
class Rng;

/// Raw feature value: double for numeric features, label index for
/// categorical ones.
using FeatureValue = std::variant<double, std::size_t>;

struct NumericKind {
  double lower = 0.0;
  double upper = 1.0;
  bool integral = false;
};

struct CategoricalKind {
  std::vector<std::string> labels;
};

struct FeatureSpec {
  std::string name;
  std::variant<NumericKind, CategoricalKind> kind;
  bool is_protected = false;

  bool numeric() const { return std::holds_alternative<NumericKind>(kind); }
  const NumericKind& num() const { return std::get<NumericKind>(kind); }
  const CategoricalKind& cat() const { return std::get<CategoricalKind>(kind); }
  /// Width of this feature's block in the encoded vector.
  std::size_t encoded_width() const {
    return numeric() ? 1 : cat().labels.size();
  }
};

/// One forbidden conjunction over protected feature values.
struct ConsistencyRule {
  std::vector<std::pair<std::size_t, FeatureValue>> atoms;  // (feature, value)
};

struct Instance {
  std::vector<FeatureValue> values;  // aligned with schema feature order
};

/// A concrete assignment of all protected features, with its encoded form
/// cached for the counterfactual fast path.
struct ProtectedCombo {
  std::vector<FeatureValue> values;          // aligned with protected_indices
  std::vector<std::pair<std::size_t, double>> encoded;  // (coord, value)
};

class FeatureSchema {
 public:
  FeatureSchema(std::vector<FeatureSpec> features,
                std::vector<ConsistencyRule> rules);

  const std::vector<FeatureSpec>& features() const { return features_; }
  const FeatureSpec& feature(std::size_t i) const { return features_[i]; }
  std::size_t num_features() const { return features_.size(); }
  std::size_t feature_index(const std::string& name) const;
  std::optional<std::size_t> try_feature_index(const std::string& name) const;

  std::size_t encoded_width() const { return encoded_width_; }
  /// Start of feature i's block in the encoded vector.
  std::size_t offset(std::size_t i) const { return offsets_[i]; }

  const std::vector<std::size_t>& protected_indices() const {
    return protected_indices_;
  }
  const std::vector<std::size_t>& non_protected_indices() const {
    return non_protected_indices_;
  }
  const std::vector<ConsistencyRule>& consistency_rules() const {
    return rules_;
  }

  /// The K valid protected combinations, lexicographic over declaration order.
  const std::vector<ProtectedCombo>& protected_combos() const {
    return combos_;
  }
  std::size_t K() const { return combos_.size(); }

  /// Index of the combo matching the instance's protected values.
  std::size_t combo_index_of(const Instance& inst) const;

  void validate_instance(const Instance& inst) const;

  Vector encode(const Instance& inst) const;
  Instance decode(const Vector& encoded) const;

  /// Overwrite the protected coordinate blocks of an encoded vector with
  /// combo k's values. Fast path for counterfactual sweeps.
  void apply_combo(Vector& encoded, std::size_t combo) const;

  /// The K counterfactuals of `inst`: same non-protected features, protected
  /// block ranging over all valid combos in enumeration order.
  std::vector<Instance> enumerate_counterfactuals(const Instance& inst) const;

  Instance random_instance(Rng& rng) const;

  /// Human-readable rendering of one feature value ("37", "Private").
  std::string value_to_string(std::size_t feature, const FeatureValue& v) const;

 private:
  bool violates_rule(const std::vector<FeatureValue>& all_values) const;

  std::vector<FeatureSpec> features_;
  std::vector<ConsistencyRule> rules_;
  std::vector<std::size_t> offsets_;
  std::size_t encoded_width_ = 0;
  std::vector<std::size_t> protected_indices_;
  std::vector<std::size_t> non_protected_indices_;
  std::vector<ProtectedCombo> combos_;
};

FeatureSchema load_schema(const std::string& path);
FeatureSchema parse_schema_json(const std::string& text);
std::string schema_to_json(const FeatureSchema& schema);
void save_schema(const FeatureSchema& schema, const std::string& path);

}  // namespace kfair
