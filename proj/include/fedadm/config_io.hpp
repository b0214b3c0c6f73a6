#pragma once

#include "fedadm/model.hpp"

#include <filesystem>
#include <string>

namespace fedadm {

// JSON shape: {"lc", "pc", "load_scale", "cost_scale",
//              "classes": [{"lambda", "mu", "w", "r", "phi"}, ...]}
// load_scale and cost_scale are optional and default to 1.
SystemConfig parse_config(const std::string& text);
SystemConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const SystemConfig& config, int indent = 2);

// 16 hex digits; FNV-1a over the compact canonical JSON form.
std::string config_hash(const SystemConfig& config);

std::uint64_t fnv1a(std::string_view bytes);

} // namespace fedadm
