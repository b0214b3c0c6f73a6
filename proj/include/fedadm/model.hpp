#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedadm {

// Decisions available to the admission controller. NoAction is the only
// legal choice while a departure is being processed.
enum class Action : std::uint8_t { Reject = 0, Accept = 1, Federate = 2, NoAction = 3 };

inline constexpr std::size_t kNumActions = 4;

// Order used to break ties in every argmax over actions.
inline constexpr std::array<Action, kNumActions> kActionPriority = {
    Action::Accept, Action::Federate, Action::Reject, Action::NoAction};

std::string_view to_string(Action action);
Action action_from_string(std::string_view name);

// Small bitmask set of actions.
class ActionSet {
public:
    constexpr ActionSet() = default;

    constexpr void insert(Action a) { mask_ |= bit(a); }
    constexpr bool contains(Action a) const { return (mask_ & bit(a)) != 0; }
    constexpr bool empty() const { return mask_ == 0; }
    constexpr std::uint8_t mask() const { return mask_; }
    std::size_t size() const;

    // Members in tie-break priority order.
    std::vector<Action> members() const;

    friend constexpr bool operator==(ActionSet, ActionSet) = default;

private:
    static constexpr std::uint8_t bit(Action a) {
        return static_cast<std::uint8_t>(1u << static_cast<unsigned>(a));
    }
    std::uint8_t mask_ = 0;
};

struct TrafficClass {
    double arrival_rate = 1.0;   // demands per unit time
    double departure_rate = 1.0; // per-demand completion rate
    int resource_demand = 1;     // resource units held while active
    double revenue = 0.0;
    double federation_cost = 0.0;

    friend bool operator==(const TrafficClass&, const TrafficClass&) = default;
};

// Two-domain system. load_scale and cost_scale are applied lazily through
// the effective_* accessors so one base config can drive every sweep.
struct SystemConfig {
    int local_capacity = 0;
    int provider_capacity = 0;
    std::vector<TrafficClass> classes;
    double load_scale = 1.0;
    double cost_scale = 1.0;

    // Throws ConfigError when an invariant does not hold.
    void validate() const;

    std::size_t num_classes() const { return classes.size(); }
    double effective_arrival_rate(std::size_t i) const { return load_scale * classes[i].arrival_rate; }
    double effective_federation_cost(std::size_t i) const { return cost_scale * classes[i].federation_cost; }
    double total_arrival_rate() const;

    // Sum of w_i * lambda_i / mu_i at the current load scale.
    double offered_load() const;

    friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

// The two-domain, two-class defaults used throughout the experiments.
SystemConfig default_config();

enum class EventKind : std::uint8_t { Arrival, Departure };

struct EventMark {
    int class_index = 0;
    EventKind kind = EventKind::Arrival;

    friend bool operator==(const EventMark&, const EventMark&) = default;
};

struct State {
    std::vector<int> local;
    std::vector<int> federated;
    EventMark event;

    bool is_arrival() const { return event.kind == EventKind::Arrival; }
    bool is_departure() const { return event.kind == EventKind::Departure; }

    friend bool operator==(const State&, const State&) = default;
};

// "[(l) (f) +eK]" with classes numbered from 1.
std::string to_string(const State& s);

// Empty system with an arrival of the given class.
State empty_arrival_state(const SystemConfig& config, int class_index);

int used_capacity(std::span<const int> counts, const SystemConfig& config);

// True when the state satisfies every structural invariant for the config.
bool is_valid_state(const State& s, const SystemConfig& config);

ActionSet valid_actions(const State& s, const SystemConfig& config);

// Immediate reward of taking `action` in a state whose event is `event`.
double action_reward(const EventMark& event, Action action, const SystemConfig& config);

struct ActionEffect {
    std::vector<int> local;
    std::vector<int> federated;
    double reward = 0.0;
};

// Occupancy right after the decision, before the next event. Departures are
// resolved by the transition/simulation step, so NoAction leaves counts as is.
ActionEffect apply_action(const State& s, Action action, const SystemConfig& config);

} // namespace fedadm
