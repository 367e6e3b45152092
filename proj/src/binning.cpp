#include "mcgam/binning.hpp"

#include <algorithm>
#include <cmath>

#include "mcgam/dataset.hpp"
#include "mcgam/errors.hpp"

namespace mcgam {

int FeatureBins::bin_of(double raw_value) const {
    if (is_discrete(kind)) {
        int idx = static_cast<int>(raw_value);
        if (idx < 0 || idx >= static_cast<int>(categories.size()))
            throw SchemaError("feature " + name + ": category index " +
                              std::to_string(idx) + " out of range");
        return idx;
    }
    // Number of cut points <= value; outer bins absorb out-of-range values.
    auto it = std::upper_bound(cuts.begin(), cuts.end(), raw_value);
    return static_cast<int>(it - cuts.begin());
}

void FeatureBins::validate() const {
    if (bin_count() < 1) throw SchemaError("feature " + name + ": no bins");
    for (std::size_t i = 1; i < cuts.size(); ++i)
        if (!(cuts[i - 1] < cuts[i]))
            throw SchemaError("feature " + name + ": cut points not strictly increasing");
    for (double c : cuts)
        if (!std::isfinite(c))
            throw SchemaError("feature " + name + ": non-finite cut point");
}

void BinSpec::validate() const {
    for (const auto& fb : features) fb.validate();
}

namespace {

/// Equi-frequency cuts: for each target count j*n/max_bins, place a cut
/// halfway between the unique values straddling that rank. Duplicates
/// collapse, so heavy ties produce fewer bins.
std::vector<double> quantile_cuts(std::vector<double> values, int max_bins) {
    std::sort(values.begin(), values.end());
    std::vector<double> uniques;
    std::vector<std::size_t> cum_counts;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (uniques.empty() || values[i] != uniques.back()) {
            uniques.push_back(values[i]);
            cum_counts.push_back(i + 1);
        } else {
            cum_counts.back() = i + 1;
        }
    }
    std::vector<double> cuts;
    if (uniques.size() < 2) return cuts;
    const double n = static_cast<double>(values.size());
    for (int j = 1; j < max_bins; ++j) {
        double target = n * j / max_bins;
        std::size_t q = 0;
        while (q < cum_counts.size() && static_cast<double>(cum_counts[q]) < target) ++q;
        if (q + 1 >= uniques.size()) continue;
        double cut = 0.5 * (uniques[q] + uniques[q + 1]);
        if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
    }
    return cuts;
}

} // namespace

BinSpec build_bins(const Dataset& dataset, int max_bins) {
    if (dataset.rows() == 0) throw SchemaError("cannot build bins from an empty dataset");
    if (max_bins < 2) throw SchemaError("max_bins must be >= 2");

    BinSpec spec;
    spec.features.reserve(dataset.schema.size());
    for (int i = 0; i < dataset.features(); ++i) {
        const FeatureSpec& fs = dataset.schema.features[i];
        FeatureBins fb;
        fb.name = fs.name;
        fb.kind = fs.kind;
        if (is_discrete(fs.kind)) {
            fb.categories = fs.categories;
        } else {
            std::vector<double> column(dataset.rows());
            for (int r = 0; r < dataset.rows(); ++r) column[r] = dataset.raw_at(r, i);
            fb.cuts = quantile_cuts(std::move(column), max_bins);
        }
        fb.validate();
        spec.features.push_back(std::move(fb));
    }
    return spec;
}

void apply_bins(Dataset& dataset, const BinSpec& spec) {
    if (spec.size() != dataset.schema.size())
        throw SchemaError("bin spec has " + std::to_string(spec.size()) +
                          " features, dataset has " + std::to_string(dataset.schema.size()));
    dataset.binned.resize(dataset.raw.size());
    const int d = dataset.features();
    for (int r = 0; r < dataset.rows(); ++r)
        for (int i = 0; i < d; ++i)
            dataset.binned[static_cast<std::size_t>(r) * d + i] =
                spec.features[i].bin_of(dataset.raw_at(r, i));
}

} // namespace mcgam
