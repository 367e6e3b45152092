#pragma once

#include <string>
#include <vector>

namespace mcgam {

enum class FeatureKind { Continuous, Categorical, Ordinal };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

inline bool is_discrete(FeatureKind kind) { return kind != FeatureKind::Continuous; }

/// One feature's declared type. For categorical/ordinal features the
/// category list fixes both the admissible values and their display order.
struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    std::vector<std::string> categories; // discrete kinds only, ordered, duplicate-free
};

struct FeatureSchema {
    std::vector<FeatureSpec> features;

    std::size_t size() const { return features.size(); }
    /// Feature names unique, category lists non-empty and duplicate-free.
    void validate() const; // throws SchemaError
};

} // namespace mcgam
