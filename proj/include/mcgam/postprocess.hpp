#pragma once

#include <span>
#include <string>
#include <vector>

#include "mcgam/model.hpp"

namespace mcgam {

struct Dataset;

/// Statistics of one edge (boundary between consecutive bins) of one
/// feature: the per-class shape jumps across it and the empirical
/// expectation of the per-class log-probability change.
struct EdgeStats {
    std::vector<double> jumps; // [K]
    std::vector<double> pbar;  // [K]
    int support = 0;           // rows whose bin is the edge's left side
    bool fallback = false;     // no support: interventional estimate over all rows
};

/// Per-edge slice of an AxiomReport; one row per class in the rendered
/// table.
struct EdgeReport {
    int feature = 0;
    int edge = 0;
    int support = 0;
    bool fallback = false;
    std::vector<double> jumps;    // [K]
    std::vector<double> pbar;     // [K]
    std::vector<double> products; // [K] jump * pbar
    int violations = 0;           // classes with product < -tolerance
};

struct AxiomReport {
    double tolerance = 1e-9;
    long long violations = 0; // total over all features/edges/classes
    int fallback_edges = 0;
    double total_qv_before = 0.0;
    double total_qv_after = 0.0;
    double max_abs_offset_jump = 0.0; // largest |offset jump| applied; 0 when verifying only
    std::vector<EdgeReport> edges;
};

/// Per-class shape jumps across every edge of a feature:
/// jumps[e][k] = shape[k][e+1] - shape[k][e]. A single-bin feature has no
/// edges.
std::vector<std::vector<double>> edge_jumps(const AdditiveModel& model, int feature);

/// Expected change of log P(class k) across one edge, estimated over the
/// rows conditioned on the edge's left bin (falling back to overriding
/// every row's bin when the left bin is empty in the data).
std::vector<double> expected_log_prob_gradient(const AdditiveModel& model,
                                               const Dataset& dataset, int feature, int edge);

/// Closed-form solution of the one-edge projection: the offset jump
/// minimizing the summed squared post-jumps subject to every post-jump
/// matching the sign of its class's expected log-probability change.
/// Requires the rank order of `jumps` to match the rank order of `pbar`
/// (which holds whenever pbar was measured on the same model and data);
/// throws ConsistencyError otherwise.
double solve_edge(std::span<const double> jumps, std::span<const double> pbar);

struct ApplyResult {
    AdditiveModel model;
    AxiomReport report;
};

/// Transforms a model into the equivalent canonical form: per feature,
/// solves every edge, accumulates the offset jumps left-to-right into g_i,
/// anchors g_i so the data-weighted mean of the class-average shape is
/// zero, and adds the offsets. Predictions are unchanged on every row;
/// the report re-verifies the output (zero violations at the tolerance).
ApplyResult apply(const AdditiveModel& model, const Dataset& dataset, double tolerance = 1e-9);

/// Evaluates the sign condition jump x expected-log-probability-change for
/// every (feature, edge, class) and flags products below -tolerance.
AxiomReport verify_axioms(const AdditiveModel& model, const Dataset& dataset,
                          double tolerance = 1e-9);

std::string axiom_report_to_json(const AxiomReport& report, const AdditiveModel& model);

/// Aligned text table, one row per (feature, edge, class).
std::string render_axiom_table(const AxiomReport& report, const AdditiveModel& model);

} // namespace mcgam
