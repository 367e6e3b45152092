#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "mcgam/binning.hpp"
#include "mcgam/boosting.hpp"
#include "mcgam/csv.hpp"
#include "mcgam/dataset.hpp"
#include "mcgam/errors.hpp"
#include "mcgam/metrics.hpp"
#include "mcgam/model.hpp"
#include "mcgam/model_json.hpp"
#include "mcgam/postprocess.hpp"
#include "mcgam/shape_export.hpp"

namespace {

using namespace mcgam;

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out << content;
}

struct TrainFlags {
    std::string data, label, valid_path, out = "model.json", log = "training_log.csv";
    double valid_fraction = 0.1;
    int max_bins = 256;
    TrainConfig config;
};

int cmd_train(const TrainFlags& f) {
    FeatureSchema schema = infer_schema(f.data, f.label);
    Dataset full = load_csv(f.data, schema, f.label);

    Dataset train_data, valid_data;
    if (!f.valid_path.empty()) {
        train_data = std::move(full);
        valid_data = load_csv(f.valid_path, schema, f.label);
        align_labels(valid_data, train_data.labels);
    } else {
        if (!(f.valid_fraction > 0.0 && f.valid_fraction < 1.0))
            throw std::invalid_argument("--valid-fraction must be in (0, 1)");
        auto parts =
            split_rows(full, {1.0 - f.valid_fraction, f.valid_fraction}, f.config.seed);
        train_data = std::move(parts[0]);
        valid_data = std::move(parts[1]);
        if (valid_data.rows() == 0)
            throw std::invalid_argument("validation split is empty; increase --valid-fraction");
    }
    if (train_data.num_classes < 2)
        throw SchemaError("training data has fewer than 2 classes");

    BinSpec bins = build_bins(train_data, f.max_bins);
    apply_bins(train_data, bins);
    apply_bins(valid_data, bins);

    TrainResult result = train(train_data, valid_data, bins, f.config);
    save_model(result.model, f.out);

    std::ostringstream log;
    log << "# learning_rate=" << format_double(f.config.learning_rate)
        << " leaves=" << f.config.leaves << " bags=" << f.config.bags
        << " max_iters=" << f.config.max_cycles << " patience=" << f.config.patience
        << " max_bins=" << f.max_bins << " seed=" << f.config.seed << "\n";
    log << "cycle,train_loss,valid_loss,seconds\n";
    for (const auto& entry : result.log)
        log << entry.cycle << ',' << format_double(entry.train_loss) << ','
            << format_double(entry.valid_loss) << ',' << format_double(entry.seconds) << '\n';
    write_text_file(f.log, log.str());

    std::cout << "trained on " << train_data.rows() << " rows (" << valid_data.rows()
              << " validation), " << train_data.features() << " features, "
              << train_data.num_classes << " classes\n";
    std::cout << "cycles run: " << result.cycles_run << ", best cycle: " << result.best_cycle
              << ", best validation loss: " << format_double(result.best_valid_loss) << "\n";
    std::cout << "model: " << f.out << "\nlog: " << f.log << "\n";
    return 0;
}

struct PredictFlags {
    std::string model, data, out = "predictions.csv";
};

int cmd_predict(const PredictFlags& f) {
    AdditiveModel model = load_model(f.model);
    Dataset ds = load_feature_csv(f.data, schema_of(model));
    apply_bins(ds, model.bins);

    std::ostringstream out;
    out << "row,label";
    for (const auto& label : model.labels) out << ',' << csv_escape(label);
    out << '\n';
    for (int r = 0; r < ds.rows(); ++r) {
        auto p = predict_proba(model, binned_row(ds, r));
        int best = 0;
        for (int k = 1; k < model.num_classes(); ++k)
            if (p[k] > p[best]) best = k;
        out << r << ',' << csv_escape(model.labels[best]);
        for (double v : p) out << ',' << format_double(v);
        out << '\n';
    }
    write_text_file(f.out, out.str());
    std::cout << "wrote " << ds.rows() << " predictions to " << f.out << "\n";
    return 0;
}

struct PostprocessFlags {
    std::string model, data, out = "model_canonical.json", report;
    bool print_table = false;
};

int cmd_postprocess(const PostprocessFlags& f) {
    AdditiveModel model = load_model(f.model);
    Dataset ds = load_feature_csv(f.data, schema_of(model));
    ds.labels = model.labels;
    ds.num_classes = model.num_classes();
    apply_bins(ds, model.bins);

    ApplyResult result = apply(model, ds);
    save_model(result.model, f.out);
    if (!f.report.empty())
        write_text_file(f.report, axiom_report_to_json(result.report, result.model));
    if (f.print_table) std::cout << render_axiom_table(result.report, result.model);

    std::cout << "canonical model: " << f.out << "\n";
    std::cout << "violations: " << result.report.violations
              << ", fallback edges: " << result.report.fallback_edges
              << ", max |offset jump|: " << format_double(result.report.max_abs_offset_jump)
              << "\n";
    std::cout << "total variation: " << format_double(result.report.total_qv_before) << " -> "
              << format_double(result.report.total_qv_after) << "\n";
    return result.report.violations == 0 ? 0 : 1;
}

struct EvalFlags {
    std::string model, data, label, out;
};

int cmd_eval(const EvalFlags& f) {
    AdditiveModel model = load_model(f.model);
    Dataset ds = load_csv(f.data, schema_of(model), f.label);
    align_labels(ds, model.labels);
    apply_bins(ds, model.bins);

    EvalReport report = evaluate(model, ds);
    std::cout << render_eval_report(report, model.labels);
    if (!f.out.empty()) write_text_file(f.out, eval_report_to_json(report));
    return 0;
}

struct ExportFlags {
    std::string model, format = "svg", rebase = "none", out_dir = "shapes";
};

int cmd_export_shapes(const ExportFlags& f) {
    AdditiveModel model = load_model(f.model);
    if (f.rebase != "none") {
        int base = -1;
        for (int k = 0; k < model.num_classes(); ++k)
            if (model.labels[k] == f.rebase) base = k;
        if (base < 0) {
            std::cerr << "error: --rebase class '" << f.rebase
                      << "' is not one of the model's labels\n";
            return 2;
        }
        model = rebase_to_class(model, base);
    }
    auto paths = export_shapes(model, f.format, f.out_dir);
    for (const auto& p : paths) std::cout << p << "\n";
    return 0;
}

struct InfoFlags {
    std::string data, label;
};

int cmd_info(const InfoFlags& f) {
    FeatureSchema schema = infer_schema(f.data, f.label);
    Dataset ds = load_csv(f.data, schema, f.label);
    auto proportions = class_proportions(ds);

    std::cout << "rows:     " << ds.rows() << "\n";
    std::cout << "features: " << ds.features() << "\n";
    std::cout << "classes:  " << ds.num_classes << "\n";
    std::cout << "class proportions:\n";
    for (int k = 0; k < ds.num_classes; ++k)
        std::cout << "  " << ds.labels[k] << ": " << format_double(proportions[k]) << "\n";
    if (ds.num_classes >= 2) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3f", normalized_entropy(proportions));
        std::cout << "normalized entropy: " << buf << "\n";
    } else {
        std::cout << "normalized entropy: 0.000\n";
        std::cout << "warning: single-class data; entropy normalization is undefined\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mcgam: multiclass additive models by cyclic gradient boosting, with "
                 "prediction-preserving canonicalization of the shape functions"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "config file; command flags live in a section named after the command");

    std::function<int()> action;

    TrainFlags tf;
    auto* train_cmd = app.add_subcommand("train", "Train a model from a CSV file");
    train_cmd->add_option("--data", tf.data, "training CSV")->required();
    train_cmd->add_option("--label", tf.label, "label column name")->required();
    train_cmd->add_option("--valid", tf.valid_path, "separate validation CSV");
    train_cmd->add_option("--valid-fraction", tf.valid_fraction,
                          "validation fraction when --valid is absent")
        ->capture_default_str();
    train_cmd->add_option("--learning-rate", tf.config.learning_rate, "shrinkage per step")
        ->capture_default_str();
    train_cmd->add_option("--leaves", tf.config.leaves, "leaves per tree")
        ->capture_default_str();
    train_cmd->add_option("--bags", tf.config.bags, "bootstrap bags per step")
        ->capture_default_str();
    train_cmd->add_option("--iters", tf.config.max_cycles, "maximum feature cycles")
        ->capture_default_str();
    train_cmd->add_option("--patience", tf.config.patience,
                          "cycles without improvement before stopping")
        ->capture_default_str();
    train_cmd->add_option("--max-bins", tf.max_bins, "bins per continuous feature")
        ->capture_default_str();
    train_cmd->add_option("--seed", tf.config.seed, "RNG seed")->capture_default_str();
    train_cmd->add_option("--threads", tf.config.threads,
                          "bag-loop threads (0 = MCGAM_THREADS or hardware)")
        ->capture_default_str();
    train_cmd->add_option("--out", tf.out, "output model file")->capture_default_str();
    train_cmd->add_option("--log", tf.log, "training log CSV")->capture_default_str();
    train_cmd->callback([&] { action = [&] { return cmd_train(tf); }; });

    PredictFlags pf;
    auto* predict_cmd = app.add_subcommand("predict", "Per-row class probabilities");
    predict_cmd->add_option("--model", pf.model, "model JSON")->required();
    predict_cmd->add_option("--data", pf.data, "input CSV")->required();
    predict_cmd->add_option("--out", pf.out, "output CSV")->capture_default_str();
    predict_cmd->callback([&] { action = [&] { return cmd_predict(pf); }; });

    PostprocessFlags of;
    auto* post_cmd =
        app.add_subcommand("postprocess", "Canonicalize a model without changing predictions");
    post_cmd->add_option("--model", of.model, "model JSON")->required();
    post_cmd->add_option("--data", of.data, "CSV supplying the empirical distribution")
        ->required();
    post_cmd->add_option("--out", of.out, "output model file")->capture_default_str();
    post_cmd->add_option("--report", of.report, "write the audit report JSON here");
    post_cmd->add_flag("--print-table", of.print_table, "print the per-edge audit table");
    post_cmd->callback([&] { action = [&] { return cmd_postprocess(of); }; });

    EvalFlags ef;
    auto* eval_cmd = app.add_subcommand("eval", "Balanced accuracy, loss and confusion matrix");
    eval_cmd->add_option("--model", ef.model, "model JSON")->required();
    eval_cmd->add_option("--data", ef.data, "labeled CSV")->required();
    eval_cmd->add_option("--label", ef.label, "label column name")->required();
    eval_cmd->add_option("--out", ef.out, "write the report JSON here");
    eval_cmd->callback([&] { action = [&] { return cmd_eval(ef); }; });

    ExportFlags xf;
    auto* export_cmd = app.add_subcommand("export-shapes", "Write per-feature shape files");
    export_cmd->add_option("--model", xf.model, "model JSON")->required();
    export_cmd->add_option("--format", xf.format, "csv, json or svg")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json", "svg"}));
    export_cmd->add_option("--rebase", xf.rebase, "base class label, or 'none'")
        ->capture_default_str();
    export_cmd->add_option("--out-dir", xf.out_dir, "output directory")->capture_default_str();
    export_cmd->callback([&] { action = [&] { return cmd_export_shapes(xf); }; });

    InfoFlags inf;
    auto* info_cmd = app.add_subcommand("info", "Dataset summary");
    info_cmd->add_option("--data", inf.data, "CSV file")->required();
    info_cmd->add_option("--label", inf.label, "label column name")->required();
    info_cmd->callback([&] { action = [&] { return cmd_info(inf); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2; // 2 for usage errors, 0 for --help
    }

    try {
        return action();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
