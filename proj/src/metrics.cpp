#include "mcgam/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mcgam/dataset.hpp"
#include "mcgam/errors.hpp"

namespace mcgam {

long long ConfusionMatrix::total() const {
    long long t = 0;
    for (const auto& row : counts)
        for (long long c : row) t += c;
    return t;
}

ConfusionMatrix ConfusionMatrix::zeros(int num_classes) {
    ConfusionMatrix m;
    m.counts.assign(num_classes, std::vector<long long>(num_classes, 0));
    return m;
}

std::vector<int> argmax_predict(const AdditiveModel& model, const Dataset& dataset) {
    if (dataset.num_classes != model.num_classes())
        throw SchemaError("dataset class count does not match model");
    std::vector<int> out(dataset.rows());
    for (int r = 0; r < dataset.rows(); ++r) {
        auto p = predict_proba(model, binned_row(dataset, r));
        int best = 0;
        for (int k = 1; k < model.num_classes(); ++k)
            if (p[k] > p[best]) best = k;
        out[r] = best;
    }
    return out;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted,
                                 int num_classes) {
    if (truth.size() != predicted.size())
        throw std::invalid_argument("truth/prediction length mismatch");
    ConfusionMatrix m = ConfusionMatrix::zeros(num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) ++m.counts[truth[i]][predicted[i]];
    return m;
}

double balanced_accuracy(const ConfusionMatrix& confusion, int* excluded_classes) {
    double recall_sum = 0.0;
    int supported = 0, excluded = 0;
    for (int k = 0; k < confusion.classes(); ++k) {
        long long row_total = 0;
        for (long long c : confusion.counts[k]) row_total += c;
        if (row_total == 0) {
            ++excluded;
            continue;
        }
        recall_sum += static_cast<double>(confusion.counts[k][k]) / row_total;
        ++supported;
    }
    if (excluded_classes) *excluded_classes = excluded;
    if (supported == 0) throw std::invalid_argument("confusion matrix has no rows");
    return recall_sum / supported;
}

EvalReport evaluate(const AdditiveModel& model, const Dataset& dataset) {
    EvalReport report;
    report.cross_entropy = cross_entropy(model, dataset);
    auto predicted = argmax_predict(model, dataset);
    report.confusion = confusion_matrix(dataset.y, predicted, model.num_classes());
    report.bacc = balanced_accuracy(report.confusion, &report.excluded_classes);
    report.per_class_recall.resize(model.num_classes());
    for (int k = 0; k < model.num_classes(); ++k) {
        long long row_total = 0;
        for (long long c : report.confusion.counts[k]) row_total += c;
        report.per_class_recall[k] =
            row_total == 0 ? std::numeric_limits<double>::quiet_NaN()
                           : static_cast<double>(report.confusion.counts[k][k]) / row_total;
    }
    return report;
}

std::string eval_report_to_json(const EvalReport& report) {
    nlohmann::json doc;
    doc["bacc"] = report.bacc;
    doc["cross_entropy"] = report.cross_entropy;
    nlohmann::json recalls = nlohmann::json::array();
    for (double r : report.per_class_recall) {
        if (std::isnan(r)) recalls.push_back(nullptr);
        else recalls.push_back(r);
    }
    doc["per_class_recall"] = std::move(recalls);
    doc["confusion"] = report.confusion.counts;
    return doc.dump(2) + "\n";
}

std::string render_eval_report(const EvalReport& report, const std::vector<std::string>& labels) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "balanced accuracy: %.6f\ncross entropy:     %.6f\n",
                  report.bacc, report.cross_entropy);
    out << line;
    if (report.excluded_classes > 0)
        out << "warning: " << report.excluded_classes
            << " class(es) with no true rows excluded from balanced accuracy\n";
    out << "\nclass              recall   confusion row (true -> predicted counts)\n";
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (std::isnan(report.per_class_recall[k]))
            std::snprintf(line, sizeof(line), "%-16s %8s  ", labels[k].c_str(), "n/a");
        else
            std::snprintf(line, sizeof(line), "%-16s %8.4f  ", labels[k].c_str(),
                          report.per_class_recall[k]);
        out << line;
        for (long long c : report.confusion.counts[k]) out << ' ' << c;
        out << '\n';
    }
    return out.str();
}

} // namespace mcgam
