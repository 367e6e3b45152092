#include <doctest.h>

#include <cmath>

#include "mcgam/metrics.hpp"
#include "mcgam/postprocess.hpp"
#include "test_util.hpp"

using namespace mcgam;

TEST_CASE("argmax prediction breaks ties toward the lowest class index") {
    Rng rng(163);
    BinSpec bins = testutil::grid_bins({3});
    Dataset ds = testutil::random_dataset(bins, 3, 10, rng);

    AdditiveModel uniform = zero_model(bins, ds.labels);
    for (int p : argmax_predict(uniform, ds)) CHECK(p == 0);

    AdditiveModel dominant = zero_model(bins, ds.labels);
    dominant.intercepts = {0.0, 5.0, 0.0};
    for (int p : argmax_predict(dominant, ds)) CHECK(p == 1);

    AdditiveModel m = testutil::random_model(bins, 3, rng);
    auto predicted = argmax_predict(m, ds);
    for (int r = 0; r < ds.rows(); ++r) {
        auto p = predict_proba(m, binned_row(ds, r));
        int best = 0;
        for (int k = 1; k < 3; ++k)
            if (p[k] > p[best]) best = k;
        CHECK(predicted[r] == best);
    }
}

TEST_CASE("balanced accuracy on crafted confusion matrices") {
    ConfusionMatrix perfect = ConfusionMatrix::zeros(3);
    perfect.counts = {{5, 0, 0}, {0, 2, 0}, {0, 0, 9}};
    CHECK(balanced_accuracy(perfect) == 1.0);

    ConfusionMatrix half = ConfusionMatrix::zeros(2);
    half.counts = {{4, 0}, {2, 2}};
    CHECK(balanced_accuracy(half) == doctest::Approx(0.75).epsilon(1e-15));

    // Everything predicted as the first class on balanced 4-class truth.
    ConfusionMatrix degenerate = ConfusionMatrix::zeros(4);
    degenerate.counts = {{3, 0, 0, 0}, {3, 0, 0, 0}, {3, 0, 0, 0}, {3, 0, 0, 0}};
    CHECK(balanced_accuracy(degenerate) == doctest::Approx(0.25).epsilon(1e-15));

    // A class with no true rows is excluded, not counted as zero recall.
    ConfusionMatrix sparse = ConfusionMatrix::zeros(3);
    sparse.counts = {{4, 0, 0}, {0, 0, 0}, {0, 0, 2}};
    int excluded = 0;
    CHECK(balanced_accuracy(sparse, &excluded) == 1.0);
    CHECK(excluded == 1);
}

TEST_CASE("balanced accuracy is invariant under class relabeling") {
    Rng rng(167);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = 3 + static_cast<int>(rng.next_below(3));
        ConfusionMatrix m = ConfusionMatrix::zeros(k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                m.counts[i][j] = static_cast<long long>(rng.next_below(20)) + (i == j ? 1 : 0);
        std::vector<int> perm(k);
        for (int i = 0; i < k; ++i) perm[i] = i;
        testutil::shuffle(perm, rng);
        ConfusionMatrix permuted = ConfusionMatrix::zeros(k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) permuted.counts[perm[i]][perm[j]] = m.counts[i][j];
        CHECK(balanced_accuracy(m) == doctest::Approx(balanced_accuracy(permuted)).epsilon(1e-12));
    }
}

TEST_CASE("evaluate composes loss, confusion and balanced accuracy") {
    Rng rng(173);
    BinSpec bins = testutil::grid_bins({4, 2});
    Dataset ds = testutil::random_dataset(bins, 3, 60, rng);
    // Balance the classes exactly.
    for (int r = 0; r < ds.rows(); ++r) ds.y[r] = r % 3;

    AdditiveModel zero = zero_model(bins, ds.labels);
    EvalReport report = evaluate(zero, ds);
    CHECK(report.bacc == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(report.cross_entropy == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(report.confusion.total() == 60);

    // Canonicalizing the model changes no prediction, hence no metric.
    AdditiveModel m = testutil::random_model(bins, 3, rng);
    EvalReport before = evaluate(m, ds);
    AdditiveModel canonical = apply(m, ds).model;
    EvalReport after = evaluate(canonical, ds);
    CHECK(before.bacc == after.bacc);
    CHECK(before.confusion.counts == after.confusion.counts);
    CHECK(before.cross_entropy == doctest::Approx(after.cross_entropy).epsilon(1e-12));
}

TEST_CASE("evaluate matches a hand-tabulated six-row case") {
    BinSpec bins = testutil::grid_bins({2});
    Dataset ds;
    ds.schema.features.push_back({"f0", FeatureKind::Continuous, {}});
    ds.labels = {"a", "b"};
    ds.num_classes = 2;
    ds.y = {0, 0, 0, 1, 1, 1};
    ds.raw = {0, 0, 1, 0, 1, 1};
    apply_bins(ds, bins);

    AdditiveModel m = zero_model(bins, ds.labels);
    m.shapes[0][0] = {1.0, -1.0}; // predicts a in bin 0, b in bin 1
    m.shapes[0][1] = {-1.0, 1.0};

    // Hand tabulation: rows 1,2 correct a; row 3 predicted b (wrong);
    // row 4 predicted a (wrong); rows 5,6 correct b.
    EvalReport report = evaluate(m, ds);
    CHECK(report.confusion.counts ==
          std::vector<std::vector<long long>>{{2, 1}, {1, 2}});
    CHECK(report.bacc == doctest::Approx(2.0 / 3).epsilon(1e-12));
    const double p_right = 1.0 / (1.0 + std::exp(-2.0));
    const double hand_loss = -(4 * std::log(p_right) + 2 * std::log(1 - p_right)) / 6;
    CHECK(report.cross_entropy == doctest::Approx(hand_loss).epsilon(1e-12));
}

TEST_CASE("a uniform-random predictor scores 1/K on balanced data") {
    const int k = 4;
    const int n = 4000;
    double sum = 0.0;
    const int seeds = 30;
    for (int seed = 0; seed < seeds; ++seed) {
        Rng rng(500 + seed);
        std::vector<int> truth(n), predicted(n);
        for (int i = 0; i < n; ++i) {
            truth[i] = i % k;
            predicted[i] = static_cast<int>(rng.next_below(k));
        }
        sum += balanced_accuracy(confusion_matrix(truth, predicted, k));
    }
    const double mean = sum / seeds;
    // Per-seed BACC has std ~ sqrt(p(1-p)/n * K/K) ~ 0.0068; 3 sigma of the
    // mean over 30 seeds.
    const double sigma = std::sqrt(0.25 * 0.75 / n);
    CHECK(std::abs(mean - 0.25) < 3.0 * sigma / std::sqrt(static_cast<double>(seeds)));
}
