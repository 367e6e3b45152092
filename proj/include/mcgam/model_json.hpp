#pragma once

#include <string>

#include "mcgam/model.hpp"

namespace mcgam {

/// Model file schema (version 1):
/// {version, K, d, labels[], features[{name, kind, cuts[]|categories[],
///  bin_count}], intercepts[K], shapes[d][K][bin_count]}
/// Doubles are written in shortest round-trip decimal form; the same
/// model always serializes to the same bytes.
std::string model_to_json(const AdditiveModel& model);
AdditiveModel model_from_json(const std::string& text);

void save_model(const AdditiveModel& model, const std::string& path);
AdditiveModel load_model(const std::string& path);

} // namespace mcgam
