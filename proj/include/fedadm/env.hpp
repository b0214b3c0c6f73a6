#pragma once

#include "fedadm/model.hpp"
#include "fedadm/policy.hpp"
#include "fedadm/rng.hpp"
#include "fedadm/state_space.hpp"

#include <array>
#include <optional>
#include <ostream>
#include <vector>

namespace fedadm {

enum class Domain : std::uint8_t { Local, Provider };

// Seeded event-driven simulator of the two-domain system. Holding times are
// exponential, so the next event is drawn by competing rates; which demand of
// a class departs is irrelevant to the state.
class Environment {
public:
    explicit Environment(SystemConfig config);

    // Empties both domains and draws the first arrival.
    const State& reset(std::uint64_t seed);

    // Starts from an arbitrary valid state, for checking one-step laws.
    const State& reset_to(const State& start, std::uint64_t seed);

    struct Step {
        const State& next;
        double reward;
        std::optional<Domain> departed_from; // set when a departure was resolved
    };

    // Throws LifecycleError before reset and InvalidActionError for illegal actions.
    Step step(Action action);

    const State& current() const;
    StateKey current_key() const { return current_key_; }
    const SystemConfig& config() const { return config_; }
    const StateCodec& codec() const { return codec_; }
    double clock() const { return clock_; }
    std::uint64_t demands_seen() const { return demands_seen_; }
    std::uint64_t steps_taken() const { return steps_; }

    // One JSON object per step: step, clock, state, action, reward.
    void set_trace(std::ostream* trace) { trace_ = trace; }

private:
    void draw_next_event();

    SystemConfig config_;
    StateCodec codec_;
    Rng rng_;
    State current_;
    StateKey current_key_{};
    bool ready_ = false;
    double clock_ = 0.0;
    std::uint64_t demands_seen_ = 0;
    std::uint64_t steps_ = 0;
    std::vector<double> rates_;
    std::ostream* trace_ = nullptr;
};

struct DemandOutcome {
    int class_index = 0;
    Action decision = Action::Reject;
    double reward = 0.0;
    double start_time = 0.0;
    std::optional<double> end_time; // absent for rejected or still-active demands
};

struct DecisionCounts {
    std::vector<std::uint64_t> accepted;
    std::vector<std::uint64_t> federated;
    std::vector<std::uint64_t> rejected;

    explicit DecisionCounts(std::size_t classes = 0) : accepted(classes), federated(classes), rejected(classes) {}
    std::uint64_t total_accepted() const;
    std::uint64_t total_federated() const;
    std::uint64_t total_rejected() const;
    void add(const DecisionCounts& other);
};

struct RunOptions {
    bool record_outcomes = false;
    bool greedy_fallback = true; // otherwise unmapped arrival states throw
    std::ostream* trace = nullptr;
};

struct RunResult {
    double profit_per_demand = 0.0;
    double total_profit = 0.0;
    std::uint64_t num_demands = 0;
    std::uint64_t steps = 0;
    std::uint64_t fallbacks = 0;
    DecisionCounts counts;
    std::vector<DemandOutcome> outcomes;
};

// Acts on `num_demands` arrival states under `policy` (departure states take
// NoAction and do not count) and returns the average profit per demand.
RunResult run_policy(const Policy& policy, const SystemConfig& config, std::uint64_t num_demands,
                     std::uint64_t seed, const RunOptions& options = {});

} // namespace fedadm
