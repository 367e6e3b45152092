#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mcgam/boosting.hpp"
#include "mcgam/dataset.hpp"
#include "mcgam/model_json.hpp"
#include "test_util.hpp"

using namespace mcgam;

namespace {

TrainConfig quick_config() {
    TrainConfig cfg;
    cfg.bags = 4;
    cfg.leaves = 2;
    cfg.max_cycles = 30;
    cfg.threads = 1;
    return cfg;
}

double single_row_loss(const std::vector<double>& z, int y) {
    auto p = softmax(z);
    return -std::log(p[y]);
}

/// Total within-leaf squared deviation from the leaf means, summed over
/// residual columns; the quantity tree splits are chosen to reduce.
double partition_sse(const std::vector<int>& bins, const std::vector<double>& residuals,
                     int num_classes, const std::vector<TreeLeaf>& leaves) {
    double total = 0.0;
    for (const TreeLeaf& leaf : leaves) {
        for (int k = 0; k < num_classes; ++k) {
            double sum = 0.0, count = 0.0;
            for (std::size_t n = 0; n < bins.size(); ++n)
                if (bins[n] >= leaf.lo && bins[n] < leaf.hi) {
                    sum += residuals[n * num_classes + k];
                    count += 1.0;
                }
            if (count == 0.0) continue;
            const double mean = sum / count;
            for (std::size_t n = 0; n < bins.size(); ++n)
                if (bins[n] >= leaf.lo && bins[n] < leaf.hi) {
                    const double dev = residuals[n * num_classes + k] - mean;
                    total += dev * dev;
                }
        }
    }
    return total;
}

} // namespace

TEST_CASE("pseudo residuals of the zero model are one-hot minus uniform") {
    Rng rng(61);
    BinSpec bins = testutil::grid_bins({3});
    Dataset ds = testutil::random_dataset(bins, 4, 1, rng);
    ds.y = {1};
    AdditiveModel zero = zero_model(bins, ds.labels);
    Residuals res = pseudo_residuals(zero, ds);
    CHECK(res.at(0, 0) == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(res.at(0, 1) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(res.at(0, 2) == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(res.at(0, 3) == doctest::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("residual rows sum to zero with entries in (-1,1)") {
    Rng rng(67);
    BinSpec bins = testutil::grid_bins({4, 3});
    Dataset ds = testutil::random_dataset(bins, 5, 40, rng);
    AdditiveModel m = testutil::random_model(bins, 5, rng, 2.0);
    Residuals res = pseudo_residuals(m, ds);
    for (int r = 0; r < res.rows; ++r) {
        double sum = 0.0;
        for (int k = 0; k < res.classes; ++k) {
            const double v = res.at(r, k);
            CHECK(v > -1.0);
            CHECK(v < 1.0);
            sum += v;
        }
        CHECK(std::abs(sum) <= 1e-12);
    }
}

TEST_CASE("a confident correct model has vanishing residuals") {
    BinSpec bins = testutil::grid_bins({1});
    Rng rng(71);
    Dataset ds = testutil::random_dataset(bins, 2, 3, rng);
    ds.y = {0, 0, 0};
    AdditiveModel m = zero_model(bins, ds.labels);
    m.intercepts = {25.0, 0.0};
    Residuals res = pseudo_residuals(m, ds);
    for (int r = 0; r < res.rows; ++r)
        for (int k = 0; k < res.classes; ++k) CHECK(std::abs(res.at(r, k)) < 1e-9);
}

TEST_CASE("residuals match central finite differences of the loss") {
    Rng rng(73);
    const double h = 1e-5;
    for (int trial = 0; trial < 25; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_below(5));
        BinSpec bins = testutil::grid_bins({3, 4});
        AdditiveModel m = testutil::random_model(bins, k, rng, 2.0);
        Dataset ds = testutil::random_dataset(bins, k, 1, rng);
        Residuals res = pseudo_residuals(m, ds);
        auto z = logits(m, binned_row(ds, 0));
        for (int j = 0; j < k; ++j) {
            auto z_hi = z, z_lo = z;
            z_hi[j] += h;
            z_lo[j] -= h;
            const double fd =
                (single_row_loss(z_hi, ds.y[0]) - single_row_loss(z_lo, ds.y[0])) / (2 * h);
            CHECK(std::abs(-fd - res.at(0, j)) < 1e-6);
        }
    }
}

TEST_CASE("fit_tree places the split where brute force says") {
    // One point per bin, class-0 residuals [1, 1, -1, -1].
    std::vector<int> bins{0, 1, 2, 3};
    std::vector<double> residuals{1, 0, 1, 0, -1, 0, -1, 0}; // 2 classes
    auto leaves = fit_tree(bins, residuals, 2, 4, 2);
    REQUIRE(leaves.size() == 2);
    CHECK(leaves[0].lo == 0);
    CHECK(leaves[0].hi == 2);
    CHECK(leaves[1].lo == 2);
    CHECK(leaves[1].hi == 4);

    // Brute force over the 3 candidate boundaries.
    double best_sse = partition_sse(bins, residuals, 2, {{0, 4}});
    int best_boundary = -1;
    for (int t = 1; t < 4; ++t) {
        double sse = partition_sse(bins, residuals, 2, {{0, t}, {t, 4}});
        if (sse < best_sse) {
            best_sse = sse;
            best_boundary = t;
        }
    }
    CHECK(best_boundary == leaves[0].hi);
}

TEST_CASE("fit_tree on random samples matches the brute-force two-leaf oracle") {
    Rng rng(79);
    for (int trial = 0; trial < 30; ++trial) {
        const int bin_count = 2 + static_cast<int>(rng.next_below(5));
        const int n = 5 + static_cast<int>(rng.next_below(20));
        const int k = 2 + static_cast<int>(rng.next_below(3));
        std::vector<int> bins(n);
        std::vector<double> residuals(static_cast<std::size_t>(n) * k);
        for (int i = 0; i < n; ++i) bins[i] = static_cast<int>(rng.next_below(bin_count));
        for (double& v : residuals) v = rng.uniform(-0.9, 0.9);

        auto leaves = fit_tree(bins, residuals, k, bin_count, 2);

        double parent_sse = partition_sse(bins, residuals, k, {{0, bin_count}});
        double best_sse = parent_sse;
        int best_boundary = -1;
        for (int t = 1; t < bin_count; ++t) {
            double sse = partition_sse(bins, residuals, k, {{0, t}, {t, bin_count}});
            if (sse < best_sse - 1e-10) {
                best_sse = sse;
                best_boundary = t;
            }
        }
        if (best_boundary < 0) {
            CHECK(leaves.size() == 1);
        } else {
            REQUIRE(leaves.size() == 2);
            CHECK(leaves[0].hi == best_boundary);
        }
    }
}

TEST_CASE("fit_tree degenerate cases") {
    std::vector<int> bins{0, 1, 2, 3};
    std::vector<double> residuals{1, 1, 1, 1}; // one class, identical values

    auto one = fit_tree(bins, residuals, 1, 4, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].lo == 0);
    CHECK(one[0].hi == 4);

    auto same = fit_tree(bins, residuals, 1, 4, 8);
    CHECK(same.size() == 1); // no split reduces variance

    // Fewer distinct bins than the leaf budget.
    std::vector<int> two_bins{0, 0, 1, 1};
    std::vector<double> split_res{0.5, 0.5, -0.5, -0.5};
    auto leaves = fit_tree(two_bins, split_res, 1, 2, 5);
    CHECK(leaves.size() == 2);
}

TEST_CASE("leaf_gamma matches direct evaluation") {
    // K=3, residuals 0.5 and 0.3 in every class column.
    std::vector<double> res{0.5, 0.5, 0.5, 0.3, 0.3, 0.3};
    auto gamma = leaf_gamma(res, 3, 1e-12);
    const double expected = (2.0 / 3.0) * (0.8 / 0.46);
    for (double g : gamma) CHECK(g == doctest::Approx(expected).epsilon(1e-12));
    CHECK(gamma[0] == doctest::Approx(1.15942).epsilon(1e-5));

    std::vector<double> zeros(6, 0.0);
    for (double g : leaf_gamma(zeros, 3, 1e-12)) CHECK(g == 0.0);

    std::vector<double> half{0.5, 0.5};
    auto g2 = leaf_gamma(half, 2, 1e-12);
    CHECK(g2[0] == doctest::Approx(1.0).epsilon(1e-12)); // (1/2) * (0.5 / 0.25)

    // Saturated residuals: the denominator vanishes, the cap takes over.
    std::vector<double> saturated{1.0 - 1e-16, 1.0 - 1e-16};
    auto capped = leaf_gamma(saturated, 2, 1e-12, 10.0);
    CHECK(capped[0] == 10.0);
}

TEST_CASE("bootstrap_sample basics and coverage") {
    Rng rng(83);
    auto single = bootstrap_sample(1, rng);
    CHECK(single == std::vector<int>{0});

    Rng a(99), b(99);
    CHECK(bootstrap_sample(50, a) == bootstrap_sample(50, b));

    // Unique fraction of an n-out-of-n bootstrap approaches 1 - 1/e.
    const int n = 100000;
    Rng big(7);
    auto draws = bootstrap_sample(n, big);
    std::vector<char> seen(n, 0);
    int unique = 0;
    for (int idx : draws)
        if (!seen[idx]) {
            seen[idx] = 1;
            ++unique;
        }
    const double fraction = static_cast<double>(unique) / n;
    CHECK(std::abs(fraction - (1.0 - std::exp(-1.0))) < 0.01);
}

TEST_CASE("boost_feature_step with one bag and one leaf is a flat Newton step") {
    Rng rng(89);
    BinSpec bins = testutil::grid_bins({4});
    Dataset ds = testutil::random_dataset(bins, 3, 30, rng);
    AdditiveModel m = testutil::random_model(bins, 3, rng);
    Residuals res = pseudo_residuals(m, ds);

    TrainConfig cfg = quick_config();
    cfg.bags = 1;
    cfg.leaves = 1;

    // Hand value: gamma over the whole bootstrap sample, one leaf.
    Rng stream = bag_rng(cfg.seed, /*cycle=*/1, /*feature=*/0, /*bag=*/0);
    auto draws = bootstrap_sample(ds.rows(), stream);
    std::vector<double> sample_res;
    for (int idx : draws)
        for (int k = 0; k < 3; ++k) sample_res.push_back(res.at(idx, k));
    auto gamma = leaf_gamma(sample_res, 3, cfg.denominator_floor, cfg.gamma_cap);

    AdditiveModel copy = m;
    auto update = boost_feature_step(copy, ds, 0, res, cfg, 1);
    for (int b = 0; b < 4; ++b)
        for (int k = 0; k < 3; ++k)
            CHECK(update[static_cast<std::size_t>(b) * 3 + k] ==
                  doctest::Approx(cfg.learning_rate * gamma[k]).epsilon(1e-12));
}

TEST_CASE("boost_feature_step with zero learning rate leaves the model unchanged") {
    Rng rng(97);
    BinSpec bins = testutil::grid_bins({5});
    Dataset ds = testutil::random_dataset(bins, 2, 25, rng);
    AdditiveModel m = testutil::random_model(bins, 2, rng);
    Residuals res = pseudo_residuals(m, ds);
    TrainConfig cfg = quick_config();
    cfg.learning_rate = 0.0;
    AdditiveModel copy = m;
    auto update = boost_feature_step(copy, ds, 0, res, cfg, 1);
    CHECK(copy.shapes == m.shapes);
    for (double u : update) CHECK(u == 0.0);
}

TEST_CASE("boost_feature_step equals the hand-average of its bags") {
    Rng rng(101);
    BinSpec bins = testutil::grid_bins({6});
    Dataset ds = testutil::random_dataset(bins, 3, 40, rng);
    AdditiveModel m = testutil::random_model(bins, 3, rng);
    Residuals res = pseudo_residuals(m, ds);

    TrainConfig cfg = quick_config();
    cfg.bags = 2;
    cfg.leaves = 3;
    cfg.seed = 5;
    const int cycle = 4, feature = 0, k = 3;

    // Recompute both bags through the public pieces.
    std::vector<double> average(6 * k, 0.0);
    for (int bag = 0; bag < cfg.bags; ++bag) {
        Rng stream = bag_rng(cfg.seed, cycle, feature, bag);
        auto draws = bootstrap_sample(ds.rows(), stream);
        std::vector<int> sample_bins;
        std::vector<double> sample_res;
        for (int idx : draws) {
            sample_bins.push_back(ds.bin_at(idx, feature));
            for (int c = 0; c < k; ++c) sample_res.push_back(res.at(idx, c));
        }
        auto leaves = fit_tree(sample_bins, sample_res, k, 6, cfg.leaves);
        for (const TreeLeaf& leaf : leaves) {
            std::vector<double> leaf_res;
            for (std::size_t n = 0; n < sample_bins.size(); ++n)
                if (sample_bins[n] >= leaf.lo && sample_bins[n] < leaf.hi)
                    for (int c = 0; c < k; ++c) leaf_res.push_back(sample_res[n * k + c]);
            auto gamma = leaf_gamma(leaf_res, k, cfg.denominator_floor, cfg.gamma_cap);
            for (int b = leaf.lo; b < leaf.hi; ++b)
                for (int c = 0; c < k; ++c)
                    average[static_cast<std::size_t>(b) * k + c] += gamma[c];
        }
    }
    for (double& v : average) v *= cfg.learning_rate / cfg.bags;

    AdditiveModel copy = m;
    auto update = boost_feature_step(copy, ds, feature, res, cfg, cycle);
    REQUIRE(update.size() == average.size());
    for (std::size_t i = 0; i < update.size(); ++i)
        CHECK(update[i] == doctest::Approx(average[i]).epsilon(1e-9));

    // And the shapes moved by exactly the update.
    for (int b = 0; b < 6; ++b)
        for (int c = 0; c < k; ++c)
            CHECK(copy.shapes[feature][c][b] ==
                  doctest::Approx(m.shapes[feature][c][b] +
                                  update[static_cast<std::size_t>(b) * k + c])
                      .epsilon(1e-13));
}

TEST_CASE("train with zero cycles returns the zero model at ln K") {
    Rng rng(103);
    BinSpec bins = testutil::grid_bins({4, 3});
    Dataset ds = testutil::random_dataset(bins, 3, 60, rng);
    auto parts = split(ds, {0.7, 0.15, 0.15}, 11);
    TrainConfig cfg = quick_config();
    cfg.max_cycles = 0;
    TrainResult result = train(parts.train, parts.valid, bins, cfg);
    for (const auto& feature : result.model.shapes)
        for (const auto& shape : feature)
            for (double v : shape) CHECK(v == 0.0);
    CHECK(result.best_valid_loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(result.log.empty());
}

TEST_CASE("train drives the loss to the bin-frequency floor on separable data") {
    // d=1, 2 bins, label determined by the bin.
    BinSpec bins = testutil::grid_bins({2});
    Rng rng(107);
    Dataset ds = testutil::random_dataset(bins, 2, 80, rng);
    for (int r = 0; r < ds.rows(); ++r) ds.y[r] = ds.bin_at(r, 0);

    auto parts = split(ds, {0.75, 0.125, 0.125}, 3);
    TrainConfig cfg;
    cfg.bags = 4;
    cfg.leaves = 2;
    cfg.max_cycles = 600;
    cfg.patience = 600;
    cfg.threads = 1;
    TrainResult result = train(parts.train, parts.valid, bins, cfg);

    // Oracle: the bin-wise empirical-frequency model (exact for separable
    // data, loss 0).
    double frequency_floor = 0.0;
    CHECK(cross_entropy(result.model, parts.train) - frequency_floor < 0.1);
}

TEST_CASE("training is deterministic across runs and thread counts") {
    Rng rng(109);
    BinSpec bins = testutil::grid_bins({5, 4});
    Dataset ds = testutil::random_dataset(bins, 3, 90, rng);
    auto parts = split(ds, {0.7, 0.15, 0.15}, 2);

    TrainConfig cfg = quick_config();
    cfg.max_cycles = 12;
    cfg.seed = 77;

    cfg.threads = 1;
    TrainResult a = train(parts.train, parts.valid, bins, cfg);
    TrainResult b = train(parts.train, parts.valid, bins, cfg);
    cfg.threads = 4;
    TrainResult c = train(parts.train, parts.valid, bins, cfg);

    CHECK(model_to_json(a.model) == model_to_json(b.model));
    CHECK(model_to_json(a.model) == model_to_json(c.model));
}

TEST_CASE("a fresh Newton step does not increase training loss on average") {
    double total_delta = 0.0;
    for (int seed = 0; seed < 24; ++seed) {
        Rng rng(1000 + seed);
        BinSpec bins = testutil::grid_bins({4, 3});
        const int k = 2 + static_cast<int>(rng.next_below(3));
        Dataset ds = testutil::random_dataset(bins, k, 50, rng);
        AdditiveModel m = testutil::random_model(bins, k, rng, 0.8);
        Residuals res = pseudo_residuals(m, ds);

        TrainConfig cfg = quick_config();
        cfg.seed = seed;
        const double before = cross_entropy(m, ds);
        boost_feature_step(m, ds, 0, res, cfg, 1);
        total_delta += cross_entropy(m, ds) - before;
    }
    CHECK(total_delta / 24.0 < 0.0);
}
