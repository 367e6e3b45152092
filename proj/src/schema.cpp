#include "mcgam/schema.hpp"

#include <unordered_set>

#include "mcgam/errors.hpp"

namespace mcgam {

std::string to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::Continuous: return "continuous";
    case FeatureKind::Categorical: return "categorical";
    case FeatureKind::Ordinal: return "ordinal";
    }
    return "?";
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "continuous") return FeatureKind::Continuous;
    if (s == "categorical") return FeatureKind::Categorical;
    if (s == "ordinal") return FeatureKind::Ordinal;
    throw ParseError("unknown feature kind: " + s);
}

void FeatureSchema::validate() const {
    std::unordered_set<std::string> names;
    for (const auto& spec : features) {
        if (spec.name.empty()) throw SchemaError("feature with empty name");
        if (!names.insert(spec.name).second)
            throw SchemaError("duplicate feature name: " + spec.name);
        if (is_discrete(spec.kind)) {
            if (spec.categories.empty())
                throw SchemaError("feature " + spec.name + ": empty category list");
            std::unordered_set<std::string> cats;
            for (const auto& c : spec.categories)
                if (!cats.insert(c).second)
                    throw SchemaError("feature " + spec.name + ": duplicate category '" + c + "'");
        } else if (!spec.categories.empty()) {
            throw SchemaError("feature " + spec.name + ": continuous feature has categories");
        }
    }
}

} // namespace mcgam
