#include "fedadm/config_io.hpp"

#include "fedadm/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fedadm {

namespace {

using nlohmann::json;

json to_json_value(const SystemConfig& c) {
    json classes = json::array();
    for (const auto& tc : c.classes)
        classes.push_back({{"lambda", tc.arrival_rate},
                           {"mu", tc.departure_rate},
                           {"w", tc.resource_demand},
                           {"r", tc.revenue},
                           {"phi", tc.federation_cost}});
    return json{{"lc", c.local_capacity},
                {"pc", c.provider_capacity},
                {"load_scale", c.load_scale},
                {"cost_scale", c.cost_scale},
                {"classes", classes}};
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + ": bad value for '" + key + "': " + e.what());
    }
}

} // namespace

SystemConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    SystemConfig c;
    c.local_capacity = required<int>(doc, "lc", "config");
    c.provider_capacity = required<int>(doc, "pc", "config");
    if (doc.contains("load_scale")) c.load_scale = required<double>(doc, "load_scale", "config");
    if (doc.contains("cost_scale")) c.cost_scale = required<double>(doc, "cost_scale", "config");
    if (!doc.contains("classes") || !doc["classes"].is_array()) throw ConfigError("config: 'classes' must be an array");
    for (std::size_t i = 0; i < doc["classes"].size(); ++i) {
        const auto& entry = doc["classes"][i];
        const std::string where = "classes[" + std::to_string(i) + "]";
        if (!entry.is_object()) throw ConfigError(where + " must be an object");
        TrafficClass tc;
        tc.arrival_rate = required<double>(entry, "lambda", where);
        tc.departure_rate = required<double>(entry, "mu", where);
        tc.resource_demand = required<int>(entry, "w", where);
        tc.revenue = required<double>(entry, "r", where);
        tc.federation_cost = required<double>(entry, "phi", where);
        c.classes.push_back(tc);
    }
    c.validate();
    return c;
}

SystemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const SystemConfig& config, int indent) {
    return to_json_value(config).dump(indent);
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const SystemConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_to_json(config, -1))));
    return buf;
}

} // namespace fedadm
