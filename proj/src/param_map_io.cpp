#include "zsar/param_map_io.hpp"

#include <fstream>

#include "zsar/dataset.hpp"
#include "zsar/errors.hpp"

namespace zsar {

namespace fs = std::filesystem;

namespace {

constexpr const char* kHeaderFile = "param_map.json";

Json shape_of(const Matrix& m) {
    return Json::array({m.rows(), m.cols()});
}

}  // namespace

Json to_json(const HyperParams& hyper) {
    return Json{{"lambda_mu", hyper.lambda_mu},
                {"lambda_1", hyper.lambda_1},
                {"lambda_sigma", hyper.lambda_sigma},
                {"lambda_2", hyper.lambda_2}};
}

HyperParams hyper_from_json(const Json& j, HyperParams defaults) {
    if (!j.is_object()) throw ConfigError("hyperparameters must be a JSON object");
    HyperParams h = defaults;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number()) throw ConfigError("hyperparameter '" + key + "' must be a number");
        const double v = value.get<double>();
        if (key == "lambda_mu") h.lambda_mu = v;
        else if (key == "lambda_1") h.lambda_1 = v;
        else if (key == "lambda_sigma") h.lambda_sigma = v;
        else if (key == "lambda_2") h.lambda_2 = v;
        else throw ConfigError("unknown hyperparameter '" + key + "'");
    }
    h.validate();
    return h;
}

Json param_map_header(const ParamMap& map) {
    Json j;
    j["format"] = "zsar-param-map";
    j["version"] = 1;
    j["basis"] = map.basis == MapBasis::Kernel ? "kernel" : "attributes";
    j["kernel"] = Json{{"kind", to_string(map.kernel.kind)}, {"bandwidth", map.kernel.bandwidth}};
    j["hyper"] = to_json(map.hyper);
    j["sections"] = Json{{"w_mu", {{"file", "w_mu.zsm"}, {"shape", shape_of(map.w_mu)}}},
                         {"w_sigma", {{"file", "w_sigma.zsm"}, {"shape", shape_of(map.w_sigma)}}},
                         {"seen_attrs", {{"file", "seen_attrs.zsm"}, {"shape", shape_of(map.seen_attrs)}}}};
    return j;
}

void save_param_map(const fs::path& dir, const ParamMap& map) {
    map.validate();
    fs::create_directories(dir);
    write_matrix(dir / "w_mu.zsm", map.w_mu);
    write_matrix(dir / "w_sigma.zsm", map.w_sigma);
    write_matrix(dir / "seen_attrs.zsm", map.seen_attrs);
    std::ofstream out(dir / kHeaderFile, std::ios::binary | std::ios::trunc);
    if (!out) throw LoadError((dir / kHeaderFile).string(), 0, "cannot open file for writing");
    out << param_map_header(map).dump(2) << '\n';
}

ParamMap load_param_map(const fs::path& dir) {
    const fs::path header_path = dir / kHeaderFile;
    std::ifstream in(header_path, std::ios::binary);
    if (!in) throw LoadError(header_path.string(), 0, "cannot open file");
    Json header;
    try {
        header = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(header_path.string(), 0, e.what());
    }
    try {
        if (header.at("format") != "zsar-param-map" || header.at("version") != 1) {
            throw LoadError(header_path.string(), 0, "not a version-1 zsar parameter map");
        }
        ParamMap map;
        map.basis = header.at("basis") == "kernel" ? MapBasis::Kernel : MapBasis::Attributes;
        map.kernel.kind = parse_kernel_kind(header.at("kernel").at("kind").get<std::string>());
        map.kernel.bandwidth = header.at("kernel").at("bandwidth").get<double>();
        map.hyper = hyper_from_json(header.at("hyper"));
        const auto& sections = header.at("sections");
        map.w_mu = read_matrix(dir / sections.at("w_mu").at("file").get<std::string>());
        map.w_sigma = read_matrix(dir / sections.at("w_sigma").at("file").get<std::string>());
        map.seen_attrs = read_matrix(dir / sections.at("seen_attrs").at("file").get<std::string>());
        map.validate();
        return map;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(header_path.string(), 0, e.what());
    }
}

}  // namespace zsar
