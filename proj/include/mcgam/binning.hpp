#pragma once

#include <vector>

#include "mcgam/schema.hpp"

namespace mcgam {

struct Dataset;

/// Discretization of one feature. Continuous features are cut into
/// half-open intervals by strictly increasing cut points (bins 0 and
/// cuts.size() extend to -inf/+inf, so out-of-range values clamp to the
/// boundary bins). Discrete features get one bin per category in schema
/// order.
struct FeatureBins {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    std::vector<double> cuts;            // continuous only
    std::vector<std::string> categories; // discrete only

    int bin_count() const {
        return is_discrete(kind) ? static_cast<int>(categories.size())
                                 : static_cast<int>(cuts.size()) + 1;
    }

    /// Bin of a raw value: number of cut points <= value for continuous
    /// features, the category index itself for discrete ones.
    int bin_of(double raw_value) const;

    void validate() const; // cut points strictly increasing, bin_count >= 1
};

struct BinSpec {
    std::vector<FeatureBins> features;

    std::size_t size() const { return features.size(); }
    void validate() const;
};

/// Equi-frequency cut points from the dataset's raw values, at most
/// max_bins bins per continuous feature (duplicate quantiles merge, a
/// constant column yields a single bin). Discrete features always get one
/// bin per schema category. Row order does not affect the result.
BinSpec build_bins(const Dataset& dataset, int max_bins = 256);

/// Fills dataset.binned from dataset.raw using the given spec.
void apply_bins(Dataset& dataset, const BinSpec& spec);

} // namespace mcgam
