#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mcgam/schema.hpp"

namespace mcgam {

/// Column-typed tabular data with integer class ids. Raw values are
/// doubles; a discrete feature's raw value is its category index. Class
/// ids are 0-based in first-appearance order; `labels` maps them back to
/// the original label strings. Immutable once binned; safe to share
/// across threads for reading.
struct Dataset {
    FeatureSchema schema;
    std::vector<std::string> labels; // class id -> original label text
    std::vector<int> y;              // per row, in [0, num_classes)
    std::vector<double> raw;         // row-major, rows x features
    std::vector<int> binned;         // row-major; empty until apply_bins

    int num_classes = 0;

    int rows() const { return static_cast<int>(y.size()); }
    int features() const { return static_cast<int>(schema.size()); }

    double raw_at(int row, int feature) const {
        return raw[static_cast<std::size_t>(row) * schema.size() + feature];
    }
    int bin_at(int row, int feature) const {
        return binned[static_cast<std::size_t>(row) * schema.size() + feature];
    }
    bool has_bins() const { return !binned.empty(); }
};

/// Guesses a schema from CSV content: columns whose every value parses as
/// a number become continuous, everything else categorical with
/// lexicographically ordered categories.
FeatureSchema infer_schema(const std::string& csv_path, const std::string& label_column);

/// Loads a CSV against a declared schema. Labels are remapped to dense
/// 0-based ids in order of first appearance, recorded in `labels`.
/// Missing (empty) cells are rejected.
Dataset load_csv(const std::string& csv_path, const FeatureSchema& schema,
                 const std::string& label_column);

/// Loads only the schema's feature columns; no label column required.
/// Class ids are all zero, for prediction-style consumers that never read
/// them.
Dataset load_feature_csv(const std::string& csv_path, const FeatureSchema& schema);

/// Remaps class ids onto another model's label order; rows whose label the
/// target ordering lacks are a schema error.
void align_labels(Dataset& dataset, const std::vector<std::string>& target_labels);

/// Disjoint, exhaustive row partition, deterministic given seed. Sizes
/// floor-round the fractions with the remainder going to the first part.
std::vector<Dataset> split_rows(const Dataset& dataset,
                                const std::vector<double>& fractions,
                                std::uint64_t seed);

struct SplitResult {
    Dataset train, valid, test;
};

/// Train/valid/test split. Fractions must be positive and sum to 1
/// (within 1e-9); requires at least 3 rows.
SplitResult split(const Dataset& dataset, std::array<double, 3> fractions,
                  std::uint64_t seed);

/// Empirical class proportions; length num_classes, sums to 1.
std::vector<double> class_proportions(const Dataset& dataset);

/// Shannon entropy of a class distribution divided by log K, so 1 means
/// perfectly balanced and 0 means single-class. (Normalizing by log K,
/// not K, is what makes the balanced case score exactly 1.) K >= 2.
double normalized_entropy(const std::vector<double>& proportions);

} // namespace mcgam
