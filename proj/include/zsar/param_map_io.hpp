#pragma once

#include <filesystem>

#include "zsar/metrics.hpp"
#include "zsar/regression.hpp"

namespace zsar {

// A saved ParamMap is a directory holding param_map.json (kernel, basis,
// hyperparameters, shapes) next to one binary matrix file per weight section.

Json param_map_header(const ParamMap& map);
Json to_json(const HyperParams& hyper);
HyperParams hyper_from_json(const Json& j, HyperParams defaults = {});

void save_param_map(const std::filesystem::path& dir, const ParamMap& map);
ParamMap load_param_map(const std::filesystem::path& dir);

}  // namespace zsar
