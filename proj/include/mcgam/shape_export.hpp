#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mcgam/model.hpp"

namespace mcgam {

/// Fixed SVG canvas; plot coordinates are affine in (bin index, shape
/// value). Exposed so geometry can be checked against hand-computed pixel
/// positions.
struct SvgLayout {
    double width = 720.0;
    double height = 440.0;
    double left = 60.0;
    double right_pad = 150.0;
    double top = 40.0;
    double bottom_pad = 50.0;

    double plot_width() const { return width - left - right_pad; }
    double plot_height() const { return height - top - bottom_pad; }

    double x(double bin_edge, int bin_count) const {
        return left + bin_edge * plot_width() / bin_count;
    }
    double y(double value, double lo, double hi) const {
        return top + (hi - value) * plot_height() / (hi - lo);
    }
};

/// Value range drawn for one feature: min/max over all class shapes,
/// padded by 5% (or by 1 when the shapes are flat).
std::pair<double, double> svg_value_range(const AdditiveModel& model, int feature);

std::string render_feature_svg(const AdditiveModel& model, int feature,
                               const SvgLayout& layout = {});

/// One file per feature; returns the written paths in feature order.
/// Format is "csv", "json" or "svg".
std::vector<std::string> export_shapes(const AdditiveModel& model, const std::string& format,
                                       const std::string& out_dir);

} // namespace mcgam
