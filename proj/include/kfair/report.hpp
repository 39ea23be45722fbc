#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "kfair/cluster.hpp"
#include "kfair/explain.hpp"
#include "kfair/milp.hpp"
#include "kfair/mitigate.hpp"
#include "kfair/schema.hpp"
#include "kfair/search.hpp"

namespace kfair {

inline constexpr const char* kToolVersion = "0.1.0";

// All report JSON groups wall-clock-derived values under "timing" objects;
// stripping those keys yields the deterministic, seed-reproducible content.

nlohmann::json instance_json(const FeatureSchema& schema, const Instance& inst);
Instance instance_from_json(const FeatureSchema& schema,
                            const nlohmann::json& j);

nlohmann::json record_json(const FeatureSchema& schema,
                           const DiscriminationRecord& rec);

nlohmann::json certificate_json(const FeatureSchema& schema,
                                const Certificate& cert);

nlohmann::json search_report_json(const FeatureSchema& schema,
                                  const SearchReport& report);

nlohmann::json predicate_json(const FeatureSchema& schema,
                              const ExplanationPredicate& pred);
ExplanationPredicate predicate_from_json(const FeatureSchema& schema,
                                         const nlohmann::json& j);

nlohmann::json explain_json(const FeatureSchema& schema,
                            const ExplainOutcome& outcome);

nlohmann::json mitigation_json(const FeatureSchema& schema,
                               const MitigationReport& report);

/// Remove every "timing" key, recursively. Used by the determinism checks.
nlohmann::json strip_timing(nlohmann::json j);

std::uint64_t fnv1a64(const std::string& bytes);
std::string file_digest_hex(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace kfair
