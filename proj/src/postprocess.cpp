#include "mcgam/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mcgam/csv.hpp"
#include "mcgam/dataset.hpp"
#include "mcgam/errors.hpp"

namespace mcgam {

std::vector<std::vector<double>> edge_jumps(const AdditiveModel& model, int feature) {
    if (feature < 0 || feature >= model.num_features())
        throw std::out_of_range("feature index out of range");
    const int k = model.num_classes();
    const int bins = model.bin_count(feature);
    std::vector<std::vector<double>> jumps;
    jumps.reserve(std::max(0, bins - 1));
    for (int e = 0; e + 1 < bins; ++e) {
        std::vector<double> j(k);
        for (int c = 0; c < k; ++c)
            j[c] = model.shapes[feature][c][e + 1] - model.shapes[feature][c][e];
        jumps.push_back(std::move(j));
    }
    return jumps;
}

namespace {

double log_sum_exp(std::span<const double> z) {
    double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    return zmax + std::log(sum);
}

std::vector<double> all_row_logits(const AdditiveModel& model, const Dataset& dataset) {
    const int k = model.num_classes();
    std::vector<double> out(static_cast<std::size_t>(dataset.rows()) * k);
    for (int r = 0; r < dataset.rows(); ++r) {
        auto z = logits(model, binned_row(dataset, r));
        std::copy(z.begin(), z.end(), out.begin() + static_cast<std::size_t>(r) * k);
    }
    return out;
}

/// pbar for every edge of one feature in one pass. For a row whose bin is
/// the edge's left side s, the two logit vectors are z and z + jumps[e];
/// the expected log-probability change is jumps[e][k] minus the mean
/// log-sum-exp shift.
std::vector<EdgeStats> feature_edge_stats(const AdditiveModel& model, const Dataset& dataset,
                                          int feature, const std::vector<double>& row_logits) {
    if (dataset.rows() == 0) throw std::invalid_argument("empty dataset");
    if (dataset.num_classes != model.num_classes())
        throw SchemaError("dataset class count does not match model");
    const int k = model.num_classes();
    const int bins = model.bin_count(feature);
    auto jumps = edge_jumps(model, feature);

    std::vector<std::vector<int>> rows_in_bin(bins);
    for (int r = 0; r < dataset.rows(); ++r) rows_in_bin[dataset.bin_at(r, feature)].push_back(r);

    std::vector<EdgeStats> stats(jumps.size());
    std::vector<double> z(k), z_next(k);
    for (std::size_t e = 0; e < jumps.size(); ++e) {
        EdgeStats& st = stats[e];
        st.jumps = jumps[e];
        st.support = static_cast<int>(rows_in_bin[e].size());
        st.fallback = st.support == 0;

        const int left_bin = static_cast<int>(e);
        double mean_shift = 0.0;
        int used = 0;
        auto accumulate = [&](int r, bool override_bin) {
            const double* base = row_logits.data() + static_cast<std::size_t>(r) * k;
            for (int c = 0; c < k; ++c) {
                z[c] = base[c];
                if (override_bin)
                    z[c] += model.shapes[feature][c][left_bin] -
                            model.shapes[feature][c][dataset.bin_at(r, feature)];
                z_next[c] = z[c] + st.jumps[c];
            }
            mean_shift += log_sum_exp(z_next) - log_sum_exp(z);
            ++used;
        };
        if (st.fallback) {
            for (int r = 0; r < dataset.rows(); ++r) accumulate(r, true);
        } else {
            for (int r : rows_in_bin[e]) accumulate(r, false);
        }
        mean_shift /= used;

        st.pbar.resize(k);
        for (int c = 0; c < k; ++c) st.pbar[c] = st.jumps[c] - mean_shift;
    }
    return stats;
}

constexpr double kRankTolerance = 1e-9;

} // namespace

std::vector<double> expected_log_prob_gradient(const AdditiveModel& model,
                                               const Dataset& dataset, int feature, int edge) {
    auto stats = feature_edge_stats(model, dataset, feature, all_row_logits(model, dataset));
    if (edge < 0 || edge >= static_cast<int>(stats.size()))
        throw std::out_of_range("edge index out of range");
    return stats[edge].pbar;
}

double solve_edge(std::span<const double> jumps, std::span<const double> pbar) {
    const std::size_t k = jumps.size();
    if (pbar.size() != k || k == 0)
        throw std::invalid_argument("jumps and pbar must be equal-length and non-empty");

    // Rank-order check: strictly opposite orderings beyond the tolerance
    // mean pbar was not measured on this model/data pair.
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            const double dj = jumps[a] - jumps[b];
            const double dp = pbar[a] - pbar[b];
            if ((dj > kRankTolerance && dp < -kRankTolerance) ||
                (dj < -kRankTolerance && dp > kRankTolerance))
                throw ConsistencyError("edge statistics are inconsistent with the shape jumps");
        }

    // Classes with pbar >= 0 force post-jump >= 0, classes with pbar < 0
    // force post-jump <= 0; both reduce to a box constraint on the offset.
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double mean = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        mean += jumps[c];
        if (pbar[c] >= 0.0) lower = std::max(lower, -jumps[c]);
        else upper = std::min(upper, -jumps[c]);
    }
    mean /= static_cast<double>(k);

    if (lower > upper) {
        if (lower - upper > kRankTolerance)
            throw ConsistencyError("infeasible edge constraints; model and statistics mixed");
        return 0.5 * (lower + upper);
    }
    return std::clamp(-mean, lower, upper);
}

namespace {

double total_quadratic_variation(const AdditiveModel& model) {
    double total = 0.0;
    for (const auto& feature : model.shapes)
        for (const auto& shape : feature) total += quadratic_variation(shape);
    return total;
}

void fill_report_edges(AxiomReport& report, const AdditiveModel& model, const Dataset& dataset) {
    auto row_logits = all_row_logits(model, dataset);
    for (int i = 0; i < model.num_features(); ++i) {
        auto stats = feature_edge_stats(model, dataset, i, row_logits);
        for (std::size_t e = 0; e < stats.size(); ++e) {
            EdgeReport er;
            er.feature = i;
            er.edge = static_cast<int>(e);
            er.support = stats[e].support;
            er.fallback = stats[e].fallback;
            er.jumps = stats[e].jumps;
            er.pbar = stats[e].pbar;
            er.products.resize(stats[e].jumps.size());
            for (std::size_t c = 0; c < er.products.size(); ++c) {
                er.products[c] = er.jumps[c] * er.pbar[c];
                if (er.products[c] < -report.tolerance) ++er.violations;
            }
            report.violations += er.violations;
            if (er.fallback) ++report.fallback_edges;
            report.edges.push_back(std::move(er));
        }
    }
}

} // namespace

AxiomReport verify_axioms(const AdditiveModel& model, const Dataset& dataset, double tolerance) {
    AxiomReport report;
    report.tolerance = tolerance;
    report.total_qv_before = total_quadratic_variation(model);
    report.total_qv_after = report.total_qv_before;
    fill_report_edges(report, model, dataset);
    return report;
}

ApplyResult apply(const AdditiveModel& model, const Dataset& dataset, double tolerance) {
    if (dataset.rows() == 0) throw std::invalid_argument("empty dataset");
    const int k = model.num_classes();
    auto row_logits = all_row_logits(model, dataset);

    OffsetSet offsets;
    offsets.g.resize(model.num_features());
    double max_abs_jump = 0.0;
    for (int i = 0; i < model.num_features(); ++i) {
        const int bins = model.bin_count(i);
        auto stats = feature_edge_stats(model, dataset, i, row_logits);

        // g_i by left-to-right summation of the per-edge solutions.
        std::vector<double>& g = offsets.g[i];
        g.assign(bins, 0.0);
        for (int e = 0; e + 1 < bins; ++e) {
            const double dg = solve_edge(stats[e].jumps, stats[e].pbar);
            g[e + 1] = g[e] + dg;
            max_abs_jump = std::max(max_abs_jump, std::abs(dg));
        }

        // Anchor: data-weighted mean of the class-average shape is zero.
        // Constants do not change predictions or the variation, this just
        // pins the one remaining degree of freedom deterministically.
        double weighted_sum = 0.0;
        for (int r = 0; r < dataset.rows(); ++r) {
            const int b = dataset.bin_at(r, i);
            double class_mean = 0.0;
            for (int c = 0; c < k; ++c) class_mean += model.shapes[i][c][b];
            weighted_sum += class_mean / k + g[b];
        }
        const double anchor = weighted_sum / dataset.rows();
        for (double& v : g) v -= anchor;
    }

    ApplyResult result;
    result.model = add_offsets(model, offsets);
    result.report = verify_axioms(result.model, dataset, tolerance);
    result.report.total_qv_before = total_quadratic_variation(model);
    result.report.max_abs_offset_jump = max_abs_jump;
    return result;
}

std::string axiom_report_to_json(const AxiomReport& report, const AdditiveModel& model) {
    nlohmann::json doc;
    doc["tolerance"] = report.tolerance;
    doc["violations"] = report.violations;
    doc["fallback_edges"] = report.fallback_edges;
    doc["total_qv_before"] = report.total_qv_before;
    doc["total_qv_after"] = report.total_qv_after;
    doc["max_abs_offset_jump"] = report.max_abs_offset_jump;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& er : report.edges) {
        nlohmann::json e;
        e["feature"] = model.bins.features[er.feature].name;
        e["feature_index"] = er.feature;
        e["edge"] = er.edge;
        e["support"] = er.support;
        e["fallback"] = er.fallback;
        e["jumps"] = er.jumps;
        e["pbar"] = er.pbar;
        e["products"] = er.products;
        e["violations"] = er.violations;
        edges.push_back(std::move(e));
    }
    doc["edges"] = std::move(edges);
    return doc.dump(2) + "\n";
}

std::string render_axiom_table(const AxiomReport& report, const AdditiveModel& model) {
    std::ostringstream out;
    out << "feature              edge  class            jump          pbar       product  flag\n";
    for (const auto& er : report.edges) {
        for (std::size_t c = 0; c < er.jumps.size(); ++c) {
            char line[160];
            std::snprintf(line, sizeof(line), "%-20s %4d  %-10s %13.6g %13.6g %13.6g  %s\n",
                          model.bins.features[er.feature].name.c_str(), er.edge,
                          model.labels[c].c_str(), er.jumps[c], er.pbar[c], er.products[c],
                          er.products[c] < -report.tolerance ? "VIOLATION" : "ok");
            out << line;
        }
    }
    out << "violations: " << report.violations << ", fallback edges: " << report.fallback_edges
        << ", total variation before: " << format_double(report.total_qv_before)
        << ", after: " << format_double(report.total_qv_after) << "\n";
    return out.str();
}

} // namespace mcgam
