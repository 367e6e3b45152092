#pragma once

#include <span>
#include <string>
#include <vector>

#include "mcgam/binning.hpp"

namespace mcgam {

struct Dataset;

/// Per-feature offsets g_i, one value per bin. Adding an OffsetSet to
/// every class's shape of the matching feature leaves all predictions
/// unchanged (softmax shift invariance), which is the degree of freedom
/// post-processing exploits.
struct OffsetSet {
    std::vector<std::vector<double>> g; // [feature][bin]
};

/// Additive softmax classifier: logit of class k is
/// intercept_k + sum_i shapes[i][k][bin_i(x)]. Shapes are piecewise
/// constant on the bin grid, exactly the function class bagged shallow
/// trees produce. Immutable in use; transformations return new models.
struct AdditiveModel {
    BinSpec bins;
    std::vector<std::string> labels;                      // class id -> label text
    std::vector<double> intercepts;                       // [K]
    std::vector<std::vector<std::vector<double>>> shapes; // [feature][class][bin]

    int num_classes() const { return static_cast<int>(intercepts.size()); }
    int num_features() const { return static_cast<int>(bins.size()); }
    int bin_count(int feature) const { return bins.features[feature].bin_count(); }

    void validate() const; // complete d x K grid, lengths match, all finite
};

/// Zero model: all shapes and intercepts 0, uniform predictions.
AdditiveModel zero_model(const BinSpec& bins, const std::vector<std::string>& labels);

/// Feature schema implied by the model's bin spec, for loading new data
/// against a stored model.
FeatureSchema schema_of(const AdditiveModel& model);

/// Per-class logits for one binned row.
std::vector<double> logits(const AdditiveModel& model, std::span<const int> binned_row);

/// Numerically safe softmax (max subtraction, no clipping).
std::vector<double> softmax(std::span<const double> z);

std::vector<double> predict_proba(const AdditiveModel& model, std::span<const int> binned_row);

/// Binned feature row of a dataset.
std::span<const int> binned_row(const Dataset& dataset, int row);

/// Mean over rows of -log P(class = y_n). Zero model scores exactly ln K.
double cross_entropy(const AdditiveModel& model, const Dataset& dataset);

/// Sum of squared jumps between consecutive bin values. For
/// piecewise-constant shapes the continuous definition's interior
/// integral vanishes, so discrete and continuous features share this
/// jump-sum form; a smooth (e.g. spline) backend would have to add the
/// squared-derivative integral.
double quadratic_variation(std::span<const double> shape_values);

/// New model with g_i added to all K shapes of each feature i.
/// Predictions are identical to the input's on every row.
AdditiveModel add_offsets(const AdditiveModel& model, const OffsetSet& offsets);

/// Logit differences per class between two rows that differ only in
/// feature i. Their ranking matches the ranking of per-class probability
/// ratios P_j(b) / P_j(a).
std::vector<double> delta_logits(const AdditiveModel& model, std::span<const int> row_a,
                                 std::span<const int> row_b, int feature);

/// Equivalent model whose base-class shapes (and intercept) are
/// identically zero: every other class's shape then reads as the logit
/// relative to the base class.
AdditiveModel rebase_to_class(const AdditiveModel& model, int base_class);

/// Imports a linear model: shape value of bin b is weight * representative
/// value of the bin. The discretization error on predictions is bounded by
/// weight magnitude times bin width.
AdditiveModel from_linear(const std::vector<std::vector<double>>& weights, // [feature][class]
                          const std::vector<double>& bias,                 // [K]
                          const BinSpec& bins,
                          const std::vector<std::vector<double>>& representatives, // [feature][bin]
                          const std::vector<std::string>& labels);

} // namespace mcgam
