#include "mcgam/shape_export.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mcgam/csv.hpp"
#include "mcgam/errors.hpp"

namespace mcgam {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                          "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a"};

std::string class_color(int k) { return kPalette[k % 12]; }

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string bin_low_text(const FeatureBins& fb, int b) {
    return b == 0 ? "-inf" : format_double(fb.cuts[b - 1]);
}
std::string bin_high_text(const FeatureBins& fb, int b) {
    return b + 1 == fb.bin_count() ? "inf" : format_double(fb.cuts[b]);
}

std::string feature_csv(const AdditiveModel& model, int i) {
    const FeatureBins& fb = model.bins.features[i];
    std::ostringstream out;
    out << (is_discrete(fb.kind) ? "category" : "bin_low,bin_high");
    for (const auto& label : model.labels) out << ',' << csv_escape(label);
    out << '\n';
    for (int b = 0; b < fb.bin_count(); ++b) {
        if (is_discrete(fb.kind)) out << csv_escape(fb.categories[b]);
        else out << bin_low_text(fb, b) << ',' << bin_high_text(fb, b);
        for (int k = 0; k < model.num_classes(); ++k)
            out << ',' << format_double(model.shapes[i][k][b]);
        out << '\n';
    }
    return out.str();
}

std::string feature_json(const AdditiveModel& model, int i) {
    const FeatureBins& fb = model.bins.features[i];
    nlohmann::json doc;
    doc["name"] = fb.name;
    doc["kind"] = to_string(fb.kind);
    if (is_discrete(fb.kind)) doc["categories"] = fb.categories;
    else doc["cuts"] = fb.cuts;
    nlohmann::json shapes;
    for (int k = 0; k < model.num_classes(); ++k) shapes[model.labels[k]] = model.shapes[i][k];
    doc["shapes"] = std::move(shapes);
    return doc.dump(2) + "\n";
}

} // namespace

std::pair<double, double> svg_value_range(const AdditiveModel& model, int feature) {
    double lo = model.shapes[feature][0][0];
    double hi = lo;
    for (const auto& shape : model.shapes[feature])
        for (double v : shape) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    double pad = (hi - lo) * 0.05;
    if (pad == 0.0) pad = 1.0;
    return {lo - pad, hi + pad};
}

std::string render_feature_svg(const AdditiveModel& model, int feature,
                               const SvgLayout& layout) {
    const FeatureBins& fb = model.bins.features[feature];
    const int bins = fb.bin_count();
    const int k = model.num_classes();
    auto [lo, hi] = svg_value_range(model, feature);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(layout.width)
        << "\" height=\"" << format_double(layout.height) << "\" viewBox=\"0 0 "
        << format_double(layout.width) << ' ' << format_double(layout.height) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << format_double(layout.left) << "\" y=\"24\" font-size=\"16\" "
           "font-family=\"sans-serif\">"
        << xml_escape(fb.name) << "</text>\n";

    // Plot frame.
    const double px0 = layout.x(0, bins), px1 = layout.x(bins, bins);
    const double py0 = layout.y(hi, lo, hi), py1 = layout.y(lo, lo, hi);
    svg << "<rect x=\"" << format_double(px0) << "\" y=\"" << format_double(py0) << "\" width=\""
        << format_double(px1 - px0) << "\" height=\"" << format_double(py1 - py0)
        << "\" fill=\"none\" stroke=\"#444\"/>\n";

    // Y ticks with value labels.
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        const double y = layout.y(v, lo, hi);
        svg << "<line x1=\"" << format_double(px0 - 4) << "\" y1=\"" << format_double(y)
            << "\" x2=\"" << format_double(px0) << "\" y2=\"" << format_double(y)
            << "\" stroke=\"#444\"/>\n";
        char label[48];
        std::snprintf(label, sizeof(label), "%.4g", v);
        svg << "<text x=\"" << format_double(px0 - 8) << "\" y=\"" << format_double(y + 4)
            << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"end\">" << label
            << "</text>\n";
    }

    // X labels: cut values at interior boundaries, category names at bin
    // centers. Thin out when crowded.
    if (is_discrete(fb.kind)) {
        const int step = std::max(1, bins / 16);
        for (int b = 0; b < bins; b += step) {
            const double x = layout.x(b + 0.5, bins);
            svg << "<text x=\"" << format_double(x) << "\" y=\""
                << format_double(py1 + 16) << "\" font-size=\"11\" font-family=\"sans-serif\" "
                   "text-anchor=\"middle\">"
                << xml_escape(fb.categories[b]) << "</text>\n";
        }
    } else {
        const int step = std::max(1, (bins - 1) / 8);
        for (int e = 1; e < bins; e += step) {
            const double x = layout.x(e, bins);
            char label[48];
            std::snprintf(label, sizeof(label), "%.4g", fb.cuts[e - 1]);
            svg << "<line x1=\"" << format_double(x) << "\" y1=\"" << format_double(py1)
                << "\" x2=\"" << format_double(x) << "\" y2=\"" << format_double(py1 + 4)
                << "\" stroke=\"#444\"/>\n";
            svg << "<text x=\"" << format_double(x) << "\" y=\"" << format_double(py1 + 16)
                << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\">"
                << label << "</text>\n";
        }
    }
    svg << "<text x=\"" << format_double((px0 + px1) / 2) << "\" y=\""
        << format_double(layout.height - 12)
        << "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\">"
        << xml_escape(fb.name) << (is_discrete(fb.kind) ? "" : " (bin boundaries at cut points)")
        << "</text>\n";
    svg << "<text x=\"16\" y=\"" << format_double((py0 + py1) / 2)
        << "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 16 "
        << format_double((py0 + py1) / 2) << ")\">logit contribution</text>\n";

    // One step polyline per class: each bin contributes a horizontal
    // segment from edge b to edge b+1 at its shape value.
    for (int c = 0; c < k; ++c) {
        svg << "<polyline fill=\"none\" stroke=\"" << class_color(c)
            << "\" stroke-width=\"1.8\" points=\"";
        for (int b = 0; b < bins; ++b) {
            const double y = layout.y(model.shapes[feature][c][b], lo, hi);
            if (b > 0) svg << ' ';
            svg << format_double(layout.x(b, bins)) << ',' << format_double(y) << ' '
                << format_double(layout.x(b + 1, bins)) << ',' << format_double(y);
        }
        svg << "\"/>\n";
    }

    // Legend with the original class names.
    for (int c = 0; c < k; ++c) {
        const double ly = layout.top + 14.0 * c;
        svg << "<line x1=\"" << format_double(px1 + 10) << "\" y1=\"" << format_double(ly)
            << "\" x2=\"" << format_double(px1 + 30) << "\" y2=\"" << format_double(ly)
            << "\" stroke=\"" << class_color(c) << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << format_double(px1 + 36) << "\" y=\"" << format_double(ly + 4)
            << "\" font-size=\"11\" font-family=\"sans-serif\">" << xml_escape(model.labels[c])
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::string> export_shapes(const AdditiveModel& model, const std::string& format,
                                       const std::string& out_dir) {
    if (format != "csv" && format != "json" && format != "svg")
        throw std::invalid_argument("unknown export format: " + format);
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> paths;
    for (int i = 0; i < model.num_features(); ++i) {
        char prefix[32];
        std::snprintf(prefix, sizeof(prefix), "shape_%03d_", i);
        const std::string path = (std::filesystem::path(out_dir) /
                                  (prefix + sanitize(model.bins.features[i].name) + "." + format))
                                     .string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ParseError("cannot write file: " + path);
        if (format == "csv") out << feature_csv(model, i);
        else if (format == "json") out << feature_json(model, i);
        else out << render_feature_svg(model, i);
        paths.push_back(path);
    }
    return paths;
}

} // namespace mcgam
