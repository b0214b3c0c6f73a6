#include "fedadm/policy.hpp"

#include "fedadm/config_io.hpp"
#include "fedadm/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <map>

namespace fedadm {

Policy Policy::from_table(const StateSpace& space, const ActionTable& table) {
    Policy p;
    p.reserve(space.size());
    for (StateId id = 0; id < space.size(); ++id) p.set(space.key(id), table[id]);
    return p;
}

ActionTable Policy::to_table(const StateSpace& space) const {
    ActionTable table(space.size(), Action::Reject);
    for (StateId id = 0; id < space.size(); ++id) {
        const auto a = find(space.key(id));
        if (!a) throw IncompletePolicyError("policy has no action for state " + to_string(space.state(id)));
        if (!valid_actions(space.state(id), space.config()).contains(*a))
            throw InvalidActionError("policy maps state " + to_string(space.state(id)) + " to illegal action " +
                                     std::string(to_string(*a)));
        table[id] = *a;
    }
    return table;
}

void save_policy(const std::filesystem::path& path, const Policy& policy, const StateSpace& space,
                 const std::string& source) {
    // Ordered by id so the file is reproducible.
    std::map<StateId, Action> ordered;
    for (const auto& [key, action] : policy.entries()) {
        const StateId id = space.find(key);
        if (id == space.size()) throw ConfigError("policy contains a state outside the state space");
        ordered.emplace(id, action);
    }
    nlohmann::ordered_json actions = nlohmann::ordered_json::object();
    for (const auto& [id, action] : ordered) actions[std::to_string(id)] = std::string(to_string(action));
    nlohmann::ordered_json doc;
    doc["format"] = "fedadm-policy/1";
    doc["config_hash"] = config_hash(space.config());
    doc["source"] = source;
    doc["num_states"] = space.size();
    doc["actions"] = std::move(actions);

    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write policy file " + path.string());
    out << doc.dump(1) << '\n';
}

PolicyFile load_policy(const std::filesystem::path& path, const StateSpace& space) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open policy file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("policy file is not valid JSON: " + std::string(e.what()));
    }
    if (doc.value("format", "") != "fedadm-policy/1") throw ConfigError("unrecognized policy file format");
    PolicyFile file;
    file.config_hash = doc.value("config_hash", "");
    file.source = doc.value("source", "");
    if (file.config_hash != config_hash(space.config()))
        throw ConfigError("policy was produced for a different config (hash " + file.config_hash + ")");
    for (const auto& [id_text, name] : doc.at("actions").items()) {
        const unsigned long id = std::stoul(id_text);
        if (id >= space.size()) throw ConfigError("policy state id " + id_text + " out of range");
        file.policy.set(space.key(static_cast<StateId>(id)), action_from_string(name.get<std::string>()));
    }
    return file;
}

} // namespace fedadm
