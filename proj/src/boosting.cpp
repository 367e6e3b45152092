#include "mcgam/boosting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <thread>

#include "mcgam/dataset.hpp"
#include "mcgam/errors.hpp"

namespace mcgam {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || learning_rate > 1.0)
        throw std::invalid_argument("learning_rate must be in (0, 1]");
    if (leaves < 2) throw std::invalid_argument("leaves must be >= 2");
    if (bags < 1) throw std::invalid_argument("bags must be >= 1");
    if (max_cycles < 0) throw std::invalid_argument("max_cycles must be >= 0");
    if (patience < 1) throw std::invalid_argument("patience must be >= 1");
    if (!(denominator_floor > 0.0))
        throw std::invalid_argument("denominator_floor must be positive");
    if (!(gamma_cap > 0.0)) throw std::invalid_argument("gamma_cap must be positive");
}

namespace {

/// r[n][j] = 1{y_n=j} - softmax(z_n)[j], written into out (row-major).
void residuals_from_logits(const std::vector<double>& row_logits, const std::vector<int>& y,
                           int num_classes, std::vector<double>& out) {
    const int n = static_cast<int>(y.size());
    out.resize(row_logits.size());
    for (int r = 0; r < n; ++r) {
        const double* z = row_logits.data() + static_cast<std::size_t>(r) * num_classes;
        double* dst = out.data() + static_cast<std::size_t>(r) * num_classes;
        double zmax = z[0];
        for (int k = 1; k < num_classes; ++k) zmax = std::max(zmax, z[k]);
        double sum = 0.0;
        for (int k = 0; k < num_classes; ++k) {
            dst[k] = std::exp(z[k] - zmax);
            sum += dst[k];
        }
        for (int k = 0; k < num_classes; ++k) {
            double p = dst[k] / sum;
            dst[k] = (y[r] == k ? 1.0 : 0.0) - p;
        }
    }
}

double newton_gamma(double grad_sum, double hess_sum, int num_classes, double floor,
                    double cap) {
    double g = (num_classes - 1.0) / num_classes * (grad_sum / std::max(hess_sum, floor));
    return std::clamp(g, -cap, cap);
}

struct SplitChoice {
    double gain = 0.0;
    int boundary = -1; // splits [lo, hi) into [lo, boundary) and [boundary, hi)
};

/// Best boundary of one leaf by variance reduction over all residual
/// columns. Only the sum-of-squares-of-means term varies across splits,
/// so counts and per-class sums suffice.
SplitChoice best_split(const TreeLeaf& leaf, std::span<const double> bin_counts,
                       std::span<const double> bin_sums, int num_classes) {
    double n_parent = 0.0;
    std::vector<double> s_parent(num_classes, 0.0);
    for (int b = leaf.lo; b < leaf.hi; ++b) {
        n_parent += bin_counts[b];
        for (int k = 0; k < num_classes; ++k)
            s_parent[k] += bin_sums[static_cast<std::size_t>(b) * num_classes + k];
    }
    SplitChoice best;
    if (n_parent <= 0.0) return best;
    double base = 0.0;
    for (int k = 0; k < num_classes; ++k) base += s_parent[k] * s_parent[k] / n_parent;
    const double min_gain = 1e-12 * std::max(1.0, n_parent);

    double n_left = 0.0;
    std::vector<double> s_left(num_classes, 0.0);
    for (int t = leaf.lo + 1; t < leaf.hi; ++t) {
        n_left += bin_counts[t - 1];
        for (int k = 0; k < num_classes; ++k)
            s_left[k] += bin_sums[static_cast<std::size_t>(t - 1) * num_classes + k];
        const double n_right = n_parent - n_left;
        if (n_left <= 0.0 || n_right <= 0.0) continue;
        double score = 0.0;
        for (int k = 0; k < num_classes; ++k) {
            const double s_r = s_parent[k] - s_left[k];
            score += s_left[k] * s_left[k] / n_left + s_r * s_r / n_right;
        }
        const double gain = score - base;
        if (gain > min_gain && gain > best.gain) {
            best.gain = gain;
            best.boundary = t;
        }
    }
    return best;
}

std::vector<TreeLeaf> fit_tree_binned(std::span<const double> bin_counts,
                                      std::span<const double> bin_sums, int num_classes,
                                      int max_leaves) {
    const int bin_count = static_cast<int>(bin_counts.size());
    std::vector<TreeLeaf> leaves{{0, bin_count}};
    while (static_cast<int>(leaves.size()) < max_leaves) {
        SplitChoice best;
        std::size_t best_leaf = 0;
        for (std::size_t l = 0; l < leaves.size(); ++l) {
            SplitChoice c = best_split(leaves[l], bin_counts, bin_sums, num_classes);
            if (c.boundary >= 0 && c.gain > best.gain) {
                best = c;
                best_leaf = l;
            }
        }
        if (best.boundary < 0) break;
        TreeLeaf right{best.boundary, leaves[best_leaf].hi};
        leaves[best_leaf].hi = best.boundary;
        leaves.insert(leaves.begin() + best_leaf + 1, right);
    }
    return leaves;
}

} // namespace

Residuals pseudo_residuals(const AdditiveModel& model, const Dataset& dataset) {
    if (dataset.num_classes != model.num_classes())
        throw SchemaError("dataset class count does not match model");
    const int n = dataset.rows();
    const int k = model.num_classes();
    std::vector<double> row_logits(static_cast<std::size_t>(n) * k);
    for (int r = 0; r < n; ++r) {
        auto z = logits(model, binned_row(dataset, r));
        std::copy(z.begin(), z.end(), row_logits.begin() + static_cast<std::size_t>(r) * k);
    }
    Residuals res;
    res.rows = n;
    res.classes = k;
    residuals_from_logits(row_logits, dataset.y, k, res.values);
    return res;
}

std::vector<TreeLeaf> fit_tree(std::span<const int> sample_bins,
                               std::span<const double> sample_residuals, int num_classes,
                               int bin_count, int max_leaves) {
    if (sample_bins.empty()) throw std::invalid_argument("fit_tree needs a non-empty sample");
    if (max_leaves < 1) throw std::invalid_argument("max_leaves must be >= 1");
    std::vector<double> counts(bin_count, 0.0);
    std::vector<double> sums(static_cast<std::size_t>(bin_count) * num_classes, 0.0);
    for (std::size_t n = 0; n < sample_bins.size(); ++n) {
        const int b = sample_bins[n];
        counts[b] += 1.0;
        for (int k = 0; k < num_classes; ++k)
            sums[static_cast<std::size_t>(b) * num_classes + k] +=
                sample_residuals[n * num_classes + k];
    }
    return fit_tree_binned(counts, sums, num_classes, max_leaves);
}

std::vector<double> leaf_gamma(std::span<const double> leaf_residuals, int num_classes,
                               double floor, double cap) {
    if (leaf_residuals.empty() || leaf_residuals.size() % num_classes != 0)
        throw std::invalid_argument("leaf residuals must be a non-empty rows x classes block");
    const std::size_t rows = leaf_residuals.size() / num_classes;
    std::vector<double> gamma(num_classes);
    for (int k = 0; k < num_classes; ++k) {
        double grad = 0.0, hess = 0.0;
        for (std::size_t n = 0; n < rows; ++n) {
            const double r = leaf_residuals[n * num_classes + k];
            grad += r;
            hess += std::abs(r) * (1.0 - std::abs(r));
        }
        gamma[k] = newton_gamma(grad, hess, num_classes, floor, cap);
    }
    return gamma;
}

std::vector<int> bootstrap_sample(int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("bootstrap_sample needs n >= 1");
    std::vector<int> draws(n);
    for (int j = 0; j < n; ++j)
        draws[j] = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    return draws;
}

Rng bag_rng(std::uint64_t seed, int cycle, int feature, int bag) {
    return derive_rng(seed, {0x62616773ULL, static_cast<std::uint64_t>(cycle),
                             static_cast<std::uint64_t>(feature),
                             static_cast<std::uint64_t>(bag)});
}

int resolve_threads(const TrainConfig& config) {
    int t = config.threads;
    if (t <= 0) {
        if (const char* env = std::getenv("MCGAM_THREADS")) t = std::atoi(env);
    }
    if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
    if (t <= 0) t = 1;
    return std::clamp(t, 1, config.bags);
}

namespace {

void run_bags(int bags, int threads, const std::function<void(int)>& work) {
    if (threads <= 1) {
        for (int b = 0; b < bags; ++b) work(b);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (int b = w; b < bags; b += threads) work(b);
        });
    for (auto& th : pool) th.join();
}

} // namespace

std::vector<double> boost_feature_step(AdditiveModel& model, const Dataset& dataset,
                                       int feature, const Residuals& residuals,
                                       const TrainConfig& config, int cycle) {
    const int n = dataset.rows();
    const int k = model.num_classes();
    if (residuals.rows != n || residuals.classes != k)
        throw std::invalid_argument("residuals do not match dataset/model");
    const int bin_count = model.bin_count(feature);
    const std::size_t cells = static_cast<std::size_t>(bin_count) * k;

    // Each bag fills its own slot; the reduction below runs in bag order,
    // so thread scheduling cannot change the result.
    std::vector<std::vector<double>> bag_values(config.bags);
    auto one_bag = [&](int bag) {
        Rng rng = bag_rng(config.seed, cycle, feature, bag);
        std::vector<int> draws = bootstrap_sample(n, rng);
        std::vector<double> weight(n, 0.0);
        for (int idx : draws) weight[idx] += 1.0;

        std::vector<double> counts(bin_count, 0.0);
        std::vector<double> grad(cells, 0.0);
        std::vector<double> hess(cells, 0.0);
        for (int r = 0; r < n; ++r) {
            const double w = weight[r];
            if (w == 0.0) continue;
            const int b = dataset.bin_at(r, feature);
            counts[b] += w;
            for (int j = 0; j < k; ++j) {
                const double res = residuals.at(r, j);
                grad[static_cast<std::size_t>(b) * k + j] += w * res;
                hess[static_cast<std::size_t>(b) * k + j] +=
                    w * std::abs(res) * (1.0 - std::abs(res));
            }
        }

        Tree tree;
        tree.feature = feature;
        tree.leaves = fit_tree_binned(counts, grad, k, config.leaves);
        for (const TreeLeaf& leaf : tree.leaves) {
            std::vector<double> gamma(k);
            for (int j = 0; j < k; ++j) {
                double g_sum = 0.0, h_sum = 0.0;
                for (int b = leaf.lo; b < leaf.hi; ++b) {
                    g_sum += grad[static_cast<std::size_t>(b) * k + j];
                    h_sum += hess[static_cast<std::size_t>(b) * k + j];
                }
                gamma[j] = newton_gamma(g_sum, h_sum, k, config.denominator_floor,
                                        config.gamma_cap);
            }
            tree.values.push_back(std::move(gamma));
        }

        std::vector<double>& out = bag_values[bag];
        out.assign(cells, 0.0);
        for (std::size_t l = 0; l < tree.leaves.size(); ++l)
            for (int b = tree.leaves[l].lo; b < tree.leaves[l].hi; ++b)
                for (int j = 0; j < k; ++j)
                    out[static_cast<std::size_t>(b) * k + j] = tree.values[l][j];
    };
    run_bags(config.bags, resolve_threads(config), one_bag);

    std::vector<double> update(cells, 0.0);
    for (int bag = 0; bag < config.bags; ++bag)
        for (std::size_t c = 0; c < cells; ++c) update[c] += bag_values[bag][c];
    const double scale = config.learning_rate / config.bags;
    for (double& u : update) u *= scale;

    for (int j = 0; j < k; ++j)
        for (int b = 0; b < bin_count; ++b)
            model.shapes[feature][j][b] += update[static_cast<std::size_t>(b) * k + j];
    return update;
}

namespace {

double loss_from_logits(const std::vector<double>& row_logits, const std::vector<int>& y,
                        int num_classes) {
    const int n = static_cast<int>(y.size());
    double total = 0.0;
    for (int r = 0; r < n; ++r) {
        const double* z = row_logits.data() + static_cast<std::size_t>(r) * num_classes;
        double zmax = z[0];
        for (int k = 1; k < num_classes; ++k) zmax = std::max(zmax, z[k]);
        double sum = 0.0;
        for (int k = 0; k < num_classes; ++k) sum += std::exp(z[k] - zmax);
        total -= z[y[r]] - zmax - std::log(sum);
    }
    return total / n;
}

void apply_update_to_logits(std::vector<double>& row_logits, const Dataset& dataset,
                            int feature, const std::vector<double>& update, int num_classes) {
    for (int r = 0; r < dataset.rows(); ++r) {
        const int b = dataset.bin_at(r, feature);
        double* z = row_logits.data() + static_cast<std::size_t>(r) * num_classes;
        for (int k = 0; k < num_classes; ++k)
            z[k] += update[static_cast<std::size_t>(b) * num_classes + k];
    }
}

} // namespace

TrainResult train(const Dataset& train_data, const Dataset& valid_data, const BinSpec& bins,
                  const TrainConfig& config) {
    config.validate();
    if (train_data.rows() == 0) throw std::invalid_argument("empty training set");
    if (valid_data.rows() == 0) throw std::invalid_argument("empty validation set");
    if (!train_data.has_bins() || !valid_data.has_bins())
        throw SchemaError("datasets must be binned before training");
    if (train_data.num_classes != valid_data.num_classes)
        throw SchemaError("train/validation class counts differ");
    if (train_data.features() != static_cast<int>(bins.size()))
        throw SchemaError("bin spec does not match dataset");

    const int k = train_data.num_classes;
    const int d = train_data.features();

    TrainResult result;
    result.model = zero_model(bins, train_data.labels);

    // Incrementally maintained logits; shapes only ever change by whole-bin
    // updates, so both caches stay exact up to accumulation order.
    std::vector<double> train_logits(static_cast<std::size_t>(train_data.rows()) * k, 0.0);
    std::vector<double> valid_logits(static_cast<std::size_t>(valid_data.rows()) * k, 0.0);

    result.best_valid_loss = loss_from_logits(valid_logits, valid_data.y, k);
    result.best_cycle = 0;
    auto best_shapes = result.model.shapes;

    Residuals residuals;
    residuals.rows = train_data.rows();
    residuals.classes = k;

    const auto start = std::chrono::steady_clock::now();
    int stall = 0;
    for (int cycle = 1; cycle <= config.max_cycles; ++cycle) {
        for (int i = 0; i < d; ++i) {
            residuals_from_logits(train_logits, train_data.y, k, residuals.values);
            auto update =
                boost_feature_step(result.model, train_data, i, residuals, config, cycle);
            apply_update_to_logits(train_logits, train_data, i, update, k);
            apply_update_to_logits(valid_logits, valid_data, i, update, k);
        }
        CycleLog entry;
        entry.cycle = cycle;
        entry.train_loss = loss_from_logits(train_logits, train_data.y, k);
        entry.valid_loss = loss_from_logits(valid_logits, valid_data.y, k);
        entry.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.log.push_back(entry);
        result.cycles_run = cycle;

        if (entry.valid_loss < result.best_valid_loss) {
            result.best_valid_loss = entry.valid_loss;
            result.best_cycle = cycle;
            best_shapes = result.model.shapes;
            stall = 0;
        } else if (++stall >= config.patience) {
            break;
        }
    }
    result.model.shapes = std::move(best_shapes);
    return result;
}

} // namespace mcgam
