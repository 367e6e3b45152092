#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcgam/model.hpp"
#include "mcgam/rng.hpp"

namespace mcgam {

struct Dataset;

struct TrainConfig {
    double learning_rate = 0.01;
    int leaves = 3;       // per-tree leaf budget
    int bags = 100;       // bootstrap replicates per boosting step
    int max_cycles = 5000; // full passes over the feature set
    int patience = 50;    // cycles without validation improvement before stopping
    std::uint64_t seed = 0;
    double denominator_floor = 1e-12; // guards the Newton denominator
    double gamma_cap = 10.0;          // bounds leaf values when residuals saturate
    int threads = 0;                  // 0 = MCGAM_THREADS env, else hardware

    void validate() const;
};

/// Pseudo-residual matrix, one row per sample: r[n][j] = 1{y_n=j} - P(j|x_n).
/// Rows sum to zero and entries lie in (-1, 1).
struct Residuals {
    int rows = 0;
    int classes = 0;
    std::vector<double> values; // row-major rows x classes

    double at(int n, int k) const {
        return values[static_cast<std::size_t>(n) * classes + k];
    }
};

Residuals pseudo_residuals(const AdditiveModel& model, const Dataset& dataset);

/// Bin-index interval [lo, hi) of one tree leaf.
struct TreeLeaf {
    int lo = 0;
    int hi = 0;
};

/// Single-feature regression tree: ordered leaves partition the feature's
/// bins, plus one fitted value per leaf per class.
struct Tree {
    int feature = 0;
    std::vector<TreeLeaf> leaves;
    std::vector<std::vector<double>> values; // [leaf][class]
};

/// Grows a depth-limited tree on one feature's bins by greedy variance
/// reduction, where variance sums the within-leaf squared deviation over
/// all residual columns. Candidate splits are bin boundaries; growth
/// stops at max_leaves or when no boundary reduces variance. Returns the
/// leaf regions, ordered, covering [0, bin_count).
std::vector<TreeLeaf> fit_tree(std::span<const int> sample_bins,
                               std::span<const double> sample_residuals, // row-major x classes
                               int num_classes, int bin_count, int max_leaves);

/// Diagonal-Hessian Newton step for one leaf:
///   gamma_k = ((K-1)/K) * sum(r_k) / max(sum(|r_k| (1-|r_k|)), floor),
/// clamped to [-cap, cap].
std::vector<double> leaf_gamma(std::span<const double> leaf_residuals, // row-major x classes
                               int num_classes, double floor, double cap = 10.0);

/// N draws with replacement from [0, N), in draw order.
std::vector<int> bootstrap_sample(int n, Rng& rng);

/// RNG stream for bag `bag` of feature `feature` at cycle `cycle`: derived
/// from (seed, cycle, feature, bag) alone, so any parallel schedule of the
/// bag loop reproduces the same trees.
Rng bag_rng(std::uint64_t seed, int cycle, int feature, int bag);

/// One boosting step on one feature: per bag, bootstrap the (bins,
/// residuals) pairs, fit a tree, take a Newton step per leaf; the update
/// for a bin is learning_rate times the bag-average of the leaf values
/// covering it. The update is added to all K shapes of the feature and
/// returned (bin-major, update[b * K + k]).
std::vector<double> boost_feature_step(AdditiveModel& model, const Dataset& dataset,
                                       int feature, const Residuals& residuals,
                                       const TrainConfig& config, int cycle);

struct CycleLog {
    int cycle = 0;
    double train_loss = 0.0;
    double valid_loss = 0.0;
    double seconds = 0.0; // elapsed since training started
};

struct TrainResult {
    AdditiveModel model; // snapshot with the best validation loss
    std::vector<CycleLog> log;
    int best_cycle = 0;          // 0 = the untrained zero model
    double best_valid_loss = 0.0;
    int cycles_run = 0;
};

/// Cyclic gradient boosting: shapes start at zero; every cycle visits each
/// feature in order, recomputing residuals before each feature step;
/// validation loss is evaluated once per cycle and the best snapshot is
/// returned. Stops after `patience` cycles without improvement.
TrainResult train(const Dataset& train_data, const Dataset& valid_data,
                  const BinSpec& bins, const TrainConfig& config);

/// Worker count for the bag loop: explicit config wins, then the
/// MCGAM_THREADS environment variable, then hardware concurrency; always
/// in [1, bags].
int resolve_threads(const TrainConfig& config);

} // namespace mcgam
