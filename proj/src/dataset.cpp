#include "mcgam/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "mcgam/csv.hpp"
#include "mcgam/errors.hpp"
#include "mcgam/rng.hpp"

namespace mcgam {

namespace {

bool try_parse_double(const std::string& text, double& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last && !text.empty();
}

} // namespace

FeatureSchema infer_schema(const std::string& csv_path, const std::string& label_column) {
    CsvTable table = read_csv(csv_path);
    if (table.rows.empty()) throw ParseError(csv_path + ": no data rows");
    std::size_t label_idx = table.column_index(label_column);

    FeatureSchema schema;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c == label_idx) continue;
        bool numeric = true;
        std::set<std::string> distinct; // ordered: inferred categories sort lexicographically
        for (const auto& row : table.rows) {
            double v;
            if (!try_parse_double(row[c], v)) numeric = false;
            distinct.insert(row[c]);
        }
        FeatureSpec spec;
        spec.name = table.header[c];
        if (numeric) {
            spec.kind = FeatureKind::Continuous;
        } else {
            spec.kind = FeatureKind::Categorical;
            spec.categories.assign(distinct.begin(), distinct.end());
        }
        schema.features.push_back(std::move(spec));
    }
    schema.validate();
    return schema;
}

namespace {

void parse_feature_cells(Dataset& ds, const CsvTable& table, const FeatureSchema& schema,
                         const std::string& csv_path) {
    std::vector<std::size_t> feature_cols;
    feature_cols.reserve(schema.size());
    for (const auto& spec : schema.features)
        feature_cols.push_back(table.column_index(spec.name));

    std::vector<std::unordered_map<std::string, int>> category_ids(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i)
        for (std::size_t c = 0; c < schema.features[i].categories.size(); ++c)
            category_ids[i][schema.features[i].categories[c]] = static_cast<int>(c);

    ds.raw.reserve(table.rows.size() * schema.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t i = 0; i < schema.size(); ++i) {
            const std::string& cell = table.rows[r][feature_cols[i]];
            const FeatureSpec& spec = schema.features[i];
            if (cell.empty())
                throw ParseError(csv_path + ": row " + std::to_string(r + 1) +
                                 ", column " + spec.name + ": missing value");
            if (is_discrete(spec.kind)) {
                auto cit = category_ids[i].find(cell);
                if (cit == category_ids[i].end())
                    throw SchemaError(csv_path + ": row " + std::to_string(r + 1) +
                                      ", column " + spec.name + ": category '" + cell +
                                      "' not in schema");
                ds.raw.push_back(static_cast<double>(cit->second));
            } else {
                double v;
                if (!try_parse_double(cell, v) || !std::isfinite(v))
                    throw ParseError(csv_path + ": row " + std::to_string(r + 1) +
                                     ", column " + spec.name + ": cannot parse '" + cell +
                                     "' as a number");
                ds.raw.push_back(v);
            }
        }
    }
}

} // namespace

Dataset load_csv(const std::string& csv_path, const FeatureSchema& schema,
                 const std::string& label_column) {
    schema.validate();
    CsvTable table = read_csv(csv_path);
    if (table.rows.empty()) throw ParseError(csv_path + ": no data rows");

    std::size_t label_idx = table.column_index(label_column);

    Dataset ds;
    ds.schema = schema;
    ds.y.reserve(table.rows.size());
    std::unordered_map<std::string, int> label_ids;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& label = table.rows[r][label_idx];
        if (label.empty())
            throw ParseError(csv_path + ": row " + std::to_string(r + 1) + ": empty label");
        auto [it, inserted] = label_ids.try_emplace(label, static_cast<int>(ds.labels.size()));
        if (inserted) ds.labels.push_back(label);
        ds.y.push_back(it->second);
    }
    ds.num_classes = static_cast<int>(ds.labels.size());
    parse_feature_cells(ds, table, schema, csv_path);
    return ds;
}

Dataset load_feature_csv(const std::string& csv_path, const FeatureSchema& schema) {
    schema.validate();
    CsvTable table = read_csv(csv_path);
    if (table.rows.empty()) throw ParseError(csv_path + ": no data rows");
    Dataset ds;
    ds.schema = schema;
    ds.y.assign(table.rows.size(), 0);
    parse_feature_cells(ds, table, schema, csv_path);
    return ds;
}

void align_labels(Dataset& dataset, const std::vector<std::string>& target_labels) {
    std::unordered_map<std::string, int> target_ids;
    for (std::size_t k = 0; k < target_labels.size(); ++k)
        target_ids[target_labels[k]] = static_cast<int>(k);
    std::vector<int> remap(dataset.labels.size());
    for (std::size_t k = 0; k < dataset.labels.size(); ++k) {
        auto it = target_ids.find(dataset.labels[k]);
        if (it == target_ids.end())
            throw SchemaError("label '" + dataset.labels[k] + "' unknown to the model");
        remap[k] = it->second;
    }
    for (int& label : dataset.y) label = remap[label];
    dataset.labels = target_labels;
    dataset.num_classes = static_cast<int>(target_labels.size());
}

namespace {

Dataset take_rows(const Dataset& src, const std::vector<int>& rows) {
    Dataset out;
    out.schema = src.schema;
    out.labels = src.labels;
    out.num_classes = src.num_classes;
    const std::size_t d = src.schema.size();
    out.y.reserve(rows.size());
    out.raw.reserve(rows.size() * d);
    for (int r : rows) {
        out.y.push_back(src.y[r]);
        for (std::size_t i = 0; i < d; ++i) out.raw.push_back(src.raw_at(r, static_cast<int>(i)));
        if (src.has_bins())
            for (std::size_t i = 0; i < d; ++i)
                out.binned.push_back(src.bin_at(r, static_cast<int>(i)));
    }
    return out;
}

} // namespace

std::vector<Dataset> split_rows(const Dataset& dataset, const std::vector<double>& fractions,
                                std::uint64_t seed) {
    const int n = dataset.rows();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = derive_rng(seed, {0x73706c6974ULL}); // "split"
    shuffle(order, rng);

    // Floor-rounded sizes; the remainder goes to the first part.
    std::vector<int> sizes(fractions.size());
    int assigned = 0;
    for (std::size_t p = 1; p < fractions.size(); ++p) {
        sizes[p] = static_cast<int>(std::floor(n * fractions[p]));
        assigned += sizes[p];
    }
    sizes[0] = n - assigned;

    std::vector<Dataset> parts;
    int offset = 0;
    for (std::size_t p = 0; p < fractions.size(); ++p) {
        std::vector<int> rows(order.begin() + offset, order.begin() + offset + sizes[p]);
        offset += sizes[p];
        parts.push_back(take_rows(dataset, rows));
    }
    return parts;
}

SplitResult split(const Dataset& dataset, std::array<double, 3> fractions, std::uint64_t seed) {
    double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split fractions must sum to 1");
    for (double f : fractions)
        if (f <= 0) throw std::invalid_argument("split fractions must be positive");
    if (dataset.rows() < 3) throw std::invalid_argument("split needs at least 3 rows");

    auto parts = split_rows(dataset, {fractions[0], fractions[1], fractions[2]}, seed);
    return {std::move(parts[0]), std::move(parts[1]), std::move(parts[2])};
}

std::vector<double> class_proportions(const Dataset& dataset) {
    if (dataset.rows() < 1) throw std::invalid_argument("empty dataset");
    std::vector<double> p(dataset.num_classes, 0.0);
    for (int label : dataset.y) p[label] += 1.0;
    for (double& v : p) v /= dataset.rows();
    return p;
}

double normalized_entropy(const std::vector<double>& proportions) {
    const std::size_t k = proportions.size();
    if (k < 2) throw std::invalid_argument("normalized entropy needs K >= 2");
    double h = 0.0;
    for (double p : proportions) {
        if (p < 0.0 || p > 1.0 + 1e-12)
            throw std::invalid_argument("invalid probability vector");
        if (p > 0.0) h -= p * std::log(p); // 0 log 0 = 0
    }
    return h / std::log(static_cast<double>(k));
}

} // namespace mcgam
