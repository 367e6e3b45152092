#include "mcgam/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcgam/dataset.hpp"
#include "mcgam/errors.hpp"

namespace mcgam {

void AdditiveModel::validate() const {
    bins.validate();
    const int k = num_classes();
    if (k < 2) throw SchemaError("model needs at least 2 classes");
    if (static_cast<int>(labels.size()) != k)
        throw SchemaError("label list does not match class count");
    if (static_cast<int>(shapes.size()) != num_features())
        throw SchemaError("shape grid does not cover all features");
    for (int i = 0; i < num_features(); ++i) {
        if (static_cast<int>(shapes[i].size()) != k)
            throw SchemaError("feature " + bins.features[i].name + ": missing class shapes");
        for (const auto& shape : shapes[i]) {
            if (static_cast<int>(shape.size()) != bin_count(i))
                throw SchemaError("feature " + bins.features[i].name + ": shape length mismatch");
            for (double v : shape)
                if (!std::isfinite(v)) throw SchemaError("non-finite shape value");
        }
    }
    for (double v : intercepts)
        if (!std::isfinite(v)) throw SchemaError("non-finite intercept");
}

AdditiveModel zero_model(const BinSpec& bins, const std::vector<std::string>& labels) {
    AdditiveModel m;
    m.bins = bins;
    m.labels = labels;
    m.intercepts.assign(labels.size(), 0.0);
    m.shapes.resize(bins.size());
    for (std::size_t i = 0; i < bins.size(); ++i)
        m.shapes[i].assign(labels.size(),
                           std::vector<double>(bins.features[i].bin_count(), 0.0));
    return m;
}

FeatureSchema schema_of(const AdditiveModel& model) {
    FeatureSchema schema;
    for (const auto& fb : model.bins.features) {
        FeatureSpec spec;
        spec.name = fb.name;
        spec.kind = fb.kind;
        spec.categories = fb.categories;
        schema.features.push_back(std::move(spec));
    }
    return schema;
}

std::vector<double> logits(const AdditiveModel& model, std::span<const int> binned_row) {
    const int k = model.num_classes();
    const int d = model.num_features();
    if (static_cast<int>(binned_row.size()) != d)
        throw std::invalid_argument("row has wrong number of features");
    std::vector<double> z(model.intercepts.begin(), model.intercepts.end());
    for (int i = 0; i < d; ++i) {
        const int b = binned_row[i];
        if (b < 0 || b >= model.bin_count(i))
            throw std::out_of_range("bin index out of range for feature " +
                                    model.bins.features[i].name);
        for (int j = 0; j < k; ++j) z[j] += model.shapes[i][j][b];
    }
    return z;
}

std::vector<double> softmax(std::span<const double> z) {
    double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
        p[j] = std::exp(z[j] - zmax);
        sum += p[j];
    }
    for (double& v : p) v /= sum;
    return p;
}

std::vector<double> predict_proba(const AdditiveModel& model, std::span<const int> binned_row) {
    auto z = logits(model, binned_row);
    return softmax(z);
}

std::span<const int> binned_row(const Dataset& dataset, int row) {
    if (!dataset.has_bins()) throw SchemaError("dataset has no bin assignments");
    return std::span<const int>(dataset.binned)
        .subspan(static_cast<std::size_t>(row) * dataset.schema.size(), dataset.schema.size());
}

double cross_entropy(const AdditiveModel& model, const Dataset& dataset) {
    if (dataset.num_classes != model.num_classes())
        throw SchemaError("dataset class count does not match model");
    if (dataset.rows() == 0) throw std::invalid_argument("empty dataset");
    double total = 0.0;
    for (int r = 0; r < dataset.rows(); ++r) {
        auto p = predict_proba(model, binned_row(dataset, r));
        total -= std::log(p[dataset.y[r]]);
    }
    return total / dataset.rows();
}

double quadratic_variation(std::span<const double> shape_values) {
    double v = 0.0;
    for (std::size_t s = 1; s < shape_values.size(); ++s) {
        double jump = shape_values[s] - shape_values[s - 1];
        v += jump * jump;
    }
    return v;
}

AdditiveModel add_offsets(const AdditiveModel& model, const OffsetSet& offsets) {
    if (offsets.g.size() != model.shapes.size())
        throw std::invalid_argument("offset set does not cover all features");
    AdditiveModel out = model;
    for (int i = 0; i < model.num_features(); ++i) {
        if (static_cast<int>(offsets.g[i].size()) != model.bin_count(i))
            throw std::invalid_argument("offset length mismatch on feature " +
                                        model.bins.features[i].name);
        for (auto& shape : out.shapes[i])
            for (std::size_t b = 0; b < shape.size(); ++b) shape[b] += offsets.g[i][b];
    }
    return out;
}

std::vector<double> delta_logits(const AdditiveModel& model, std::span<const int> row_a,
                                 std::span<const int> row_b, int feature) {
    const int d = model.num_features();
    if (static_cast<int>(row_a.size()) != d || static_cast<int>(row_b.size()) != d)
        throw std::invalid_argument("row has wrong number of features");
    if (feature < 0 || feature >= d) throw std::out_of_range("feature index out of range");
    for (int i = 0; i < d; ++i)
        if (i != feature && row_a[i] != row_b[i])
            throw std::invalid_argument("rows differ outside feature " +
                                        model.bins.features[feature].name);
    const int ba = row_a[feature];
    const int bb = row_b[feature];
    if (ba < 0 || ba >= model.bin_count(feature) || bb < 0 || bb >= model.bin_count(feature))
        throw std::out_of_range("bin index out of range");
    std::vector<double> delta(model.num_classes());
    for (int j = 0; j < model.num_classes(); ++j)
        delta[j] = model.shapes[feature][j][bb] - model.shapes[feature][j][ba];
    return delta;
}

AdditiveModel rebase_to_class(const AdditiveModel& model, int base_class) {
    if (base_class < 0 || base_class >= model.num_classes())
        throw std::out_of_range("base class out of range");
    AdditiveModel out = model;
    for (int i = 0; i < model.num_features(); ++i) {
        const std::vector<double> base = model.shapes[i][base_class];
        for (auto& shape : out.shapes[i])
            for (std::size_t b = 0; b < shape.size(); ++b) shape[b] -= base[b];
    }
    // Shift intercepts too, so the base class's whole logit is identically 0.
    const double base_intercept = model.intercepts[base_class];
    for (double& c : out.intercepts) c -= base_intercept;
    return out;
}

AdditiveModel from_linear(const std::vector<std::vector<double>>& weights,
                          const std::vector<double>& bias, const BinSpec& bins,
                          const std::vector<std::vector<double>>& representatives,
                          const std::vector<std::string>& labels) {
    if (weights.size() != bins.size() || representatives.size() != bins.size())
        throw std::invalid_argument("weights/representatives do not cover all features");
    if (bias.size() != labels.size())
        throw std::invalid_argument("bias length does not match class count");

    AdditiveModel m = zero_model(bins, labels);
    m.intercepts = bias;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        const int bc = bins.features[i].bin_count();
        if (static_cast<int>(representatives[i].size()) != bc)
            throw std::invalid_argument("representatives length mismatch on feature " +
                                        bins.features[i].name);
        if (weights[i].size() != labels.size())
            throw std::invalid_argument("weight row length mismatch on feature " +
                                        bins.features[i].name);
        for (std::size_t k = 0; k < labels.size(); ++k)
            for (int b = 0; b < bc; ++b)
                m.shapes[i][k][b] = weights[i][k] * representatives[i][b];
    }
    m.validate();
    return m;
}

} // namespace mcgam
