#include "mcgam/model_json.hpp"

#include <fstream>

#include <json.hpp>

#include "mcgam/errors.hpp"

namespace mcgam {

using nlohmann::json;

std::string model_to_json(const AdditiveModel& model) {
    json doc;
    doc["version"] = 1;
    doc["K"] = model.num_classes();
    doc["d"] = model.num_features();
    doc["labels"] = model.labels;
    json features = json::array();
    for (const auto& fb : model.bins.features) {
        json f;
        f["name"] = fb.name;
        f["kind"] = to_string(fb.kind);
        f["bin_count"] = fb.bin_count();
        if (is_discrete(fb.kind)) f["categories"] = fb.categories;
        else f["cuts"] = fb.cuts;
        features.push_back(std::move(f));
    }
    doc["features"] = std::move(features);
    doc["intercepts"] = model.intercepts;
    doc["shapes"] = model.shapes;
    return doc.dump(2) + "\n";
}

AdditiveModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("version").get<int>() != 1)
            throw ParseError("unsupported model file version");
        AdditiveModel m;
        m.labels = doc.at("labels").get<std::vector<std::string>>();
        for (const auto& f : doc.at("features")) {
            FeatureBins fb;
            fb.name = f.at("name").get<std::string>();
            fb.kind = feature_kind_from_string(f.at("kind").get<std::string>());
            if (is_discrete(fb.kind))
                fb.categories = f.at("categories").get<std::vector<std::string>>();
            else
                fb.cuts = f.at("cuts").get<std::vector<double>>();
            if (fb.bin_count() != f.at("bin_count").get<int>())
                throw ParseError("feature " + fb.name + ": bin_count disagrees with cuts/categories");
            m.bins.features.push_back(std::move(fb));
        }
        m.intercepts = doc.at("intercepts").get<std::vector<double>>();
        m.shapes = doc.at("shapes").get<std::vector<std::vector<std::vector<double>>>>();
        if (doc.at("K").get<int>() != m.num_classes() ||
            doc.at("d").get<int>() != m.num_features())
            throw ParseError("model file K/d fields disagree with contents");
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const AdditiveModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out << model_to_json(model);
}

AdditiveModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

} // namespace mcgam
