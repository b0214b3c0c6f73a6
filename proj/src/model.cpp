#include "fedadm/model.hpp"

#include "fedadm/errors.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace fedadm {

std::string_view to_string(Action action) {
    switch (action) {
    case Action::Reject: return "reject";
    case Action::Accept: return "accept";
    case Action::Federate: return "federate";
    case Action::NoAction: return "no_action";
    }
    return "unknown";
}

Action action_from_string(std::string_view name) {
    if (name == "reject") return Action::Reject;
    if (name == "accept") return Action::Accept;
    if (name == "federate") return Action::Federate;
    if (name == "no_action") return Action::NoAction;
    throw ConfigError("unknown action name '" + std::string(name) + "'");
}

std::size_t ActionSet::size() const { return static_cast<std::size_t>(std::popcount(mask_)); }

std::vector<Action> ActionSet::members() const {
    std::vector<Action> out;
    for (Action a : kActionPriority)
        if (contains(a)) out.push_back(a);
    return out;
}

void SystemConfig::validate() const {
    if (local_capacity < 0) throw ConfigError("local capacity must be >= 0");
    if (provider_capacity < 0) throw ConfigError("provider capacity must be >= 0");
    if (classes.empty()) throw ConfigError("at least one traffic class is required");
    if (!(load_scale > 0.0) || !std::isfinite(load_scale)) throw ConfigError("load_scale must be > 0");
    if (!(cost_scale >= 0.0) || !std::isfinite(cost_scale)) throw ConfigError("cost_scale must be >= 0");
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto& c = classes[i];
        const std::string tag = "class " + std::to_string(i) + ": ";
        if (!(c.arrival_rate > 0.0) || !std::isfinite(c.arrival_rate)) throw ConfigError(tag + "lambda must be > 0");
        if (!(c.departure_rate > 0.0) || !std::isfinite(c.departure_rate)) throw ConfigError(tag + "mu must be > 0");
        if (c.resource_demand < 1) throw ConfigError(tag + "w must be >= 1");
        if (!(c.revenue >= 0.0) || !std::isfinite(c.revenue)) throw ConfigError(tag + "r must be >= 0");
        if (!(c.federation_cost >= 0.0) || !std::isfinite(c.federation_cost)) throw ConfigError(tag + "phi must be >= 0");
    }
}

double SystemConfig::total_arrival_rate() const {
    double total = 0.0;
    for (std::size_t i = 0; i < classes.size(); ++i) total += effective_arrival_rate(i);
    return total;
}

double SystemConfig::offered_load() const {
    double load = 0.0;
    for (std::size_t i = 0; i < classes.size(); ++i)
        load += classes[i].resource_demand * effective_arrival_rate(i) / classes[i].departure_rate;
    return load;
}

SystemConfig default_config() {
    SystemConfig c;
    c.local_capacity = 30;
    c.provider_capacity = 20;
    c.classes = {
        TrafficClass{10.0, 4.0, 2, 100.0, 30.0},
        TrafficClass{5.0, 0.5, 4, 20.0, 5.0},
    };
    return c;
}

std::string to_string(const State& s) {
    std::ostringstream os;
    auto vec = [&](const std::vector<int>& v) {
        os << '(';
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
        os << ')';
    };
    os << '[';
    vec(s.local);
    os << ' ';
    vec(s.federated);
    os << ' ' << (s.is_arrival() ? '+' : '-') << "e" << s.event.class_index + 1 << ']';
    return os.str();
}

State empty_arrival_state(const SystemConfig& config, int class_index) {
    State s;
    s.local.assign(config.num_classes(), 0);
    s.federated.assign(config.num_classes(), 0);
    s.event = EventMark{class_index, EventKind::Arrival};
    return s;
}

int used_capacity(std::span<const int> counts, const SystemConfig& config) {
    if (counts.size() != config.num_classes())
        throw ConfigError("count vector has " + std::to_string(counts.size()) + " entries, config has " +
                          std::to_string(config.num_classes()) + " classes");
    int used = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) used += counts[i] * config.classes[i].resource_demand;
    return used;
}

bool is_valid_state(const State& s, const SystemConfig& config) {
    const std::size_t k = config.num_classes();
    if (s.local.size() != k || s.federated.size() != k) return false;
    if (s.event.class_index < 0 || static_cast<std::size_t>(s.event.class_index) >= k) return false;
    for (std::size_t i = 0; i < k; ++i)
        if (s.local[i] < 0 || s.federated[i] < 0) return false;
    if (used_capacity(s.local, config) > config.local_capacity) return false;
    if (used_capacity(s.federated, config) > config.provider_capacity) return false;
    if (s.is_departure()) {
        const auto i = static_cast<std::size_t>(s.event.class_index);
        if (s.local[i] + s.federated[i] < 1) return false;
    }
    return true;
}

ActionSet valid_actions(const State& s, const SystemConfig& config) {
    ActionSet set;
    if (s.is_departure()) {
        set.insert(Action::NoAction);
        return set;
    }
    const int w = config.classes[static_cast<std::size_t>(s.event.class_index)].resource_demand;
    set.insert(Action::Reject);
    if (config.local_capacity - used_capacity(s.local, config) >= w) set.insert(Action::Accept);
    if (config.provider_capacity - used_capacity(s.federated, config) >= w) set.insert(Action::Federate);
    return set;
}

double action_reward(const EventMark& event, Action action, const SystemConfig& config) {
    if (event.kind == EventKind::Departure) return 0.0;
    const auto i = static_cast<std::size_t>(event.class_index);
    switch (action) {
    case Action::Accept: return config.classes[i].revenue;
    case Action::Federate: return config.classes[i].revenue - config.effective_federation_cost(i);
    default: return 0.0;
    }
}

ActionEffect apply_action(const State& s, Action action, const SystemConfig& config) {
    if (!valid_actions(s, config).contains(action))
        throw InvalidActionError("action '" + std::string(to_string(action)) + "' is not legal in state " +
                                 to_string(s));
    ActionEffect effect{s.local, s.federated, action_reward(s.event, action, config)};
    const auto i = static_cast<std::size_t>(s.event.class_index);
    if (action == Action::Accept) ++effect.local[i];
    if (action == Action::Federate) ++effect.federated[i];
    return effect;
}

} // namespace fedadm
