#pragma once

#include <string>
#include <vector>

#include "mcgam/model.hpp"

namespace mcgam {

struct Dataset;

/// K x K counts, rows are true classes, columns predicted.
struct ConfusionMatrix {
    std::vector<std::vector<long long>> counts;

    int classes() const { return static_cast<int>(counts.size()); }
    long long total() const;
    static ConfusionMatrix zeros(int num_classes);
};

/// Per-row argmax class; ties break to the lowest class index.
std::vector<int> argmax_predict(const AdditiveModel& model, const Dataset& dataset);

ConfusionMatrix confusion_matrix(const std::vector<int>& truth,
                                 const std::vector<int>& predicted, int num_classes);

/// Mean per-class recall. Classes with no true rows are excluded from the
/// mean (the conditional is undefined for them) and counted in
/// excluded_classes if provided.
double balanced_accuracy(const ConfusionMatrix& confusion, int* excluded_classes = nullptr);

struct EvalReport {
    double bacc = 0.0;
    double cross_entropy = 0.0;
    std::vector<double> per_class_recall; // NaN for classes with no true rows
    ConfusionMatrix confusion;
    int excluded_classes = 0;
};

EvalReport evaluate(const AdditiveModel& model, const Dataset& dataset);

/// {bacc, cross_entropy, per_class_recall[], confusion[][]}
std::string eval_report_to_json(const EvalReport& report);

/// Aligned text rendering with the model's label names.
std::string render_eval_report(const EvalReport& report, const std::vector<std::string>& labels);

} // namespace mcgam
