#include "fedadm/env.hpp"

#include "fedadm/agents.hpp"
#include "fedadm/errors.hpp"

#include <json.hpp>

#include <numeric>

namespace fedadm {

Environment::Environment(SystemConfig config) : config_(std::move(config)), codec_(config_) {
    config_.validate();
    rates_.resize(2 * config_.num_classes());
}

const State& Environment::current() const {
    if (!ready_) throw LifecycleError("environment used before reset");
    return current_;
}

const State& Environment::reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    current_.local.assign(config_.num_classes(), 0);
    current_.federated.assign(config_.num_classes(), 0);
    clock_ = 0.0;
    demands_seen_ = 0;
    steps_ = 0;
    ready_ = true;
    draw_next_event();
    return current_;
}

const State& Environment::reset_to(const State& start, std::uint64_t seed) {
    if (!is_valid_state(start, config_)) throw InvalidActionError("reset_to: invalid state " + to_string(start));
    rng_ = Rng(seed);
    current_ = start;
    current_key_ = codec_.encode(current_);
    clock_ = 0.0;
    demands_seen_ = start.is_arrival() ? 1 : 0;
    steps_ = 0;
    ready_ = true;
    return current_;
}

void Environment::draw_next_event() {
    const std::size_t k = config_.num_classes();
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        rates_[j] = config_.effective_arrival_rate(j);
        rates_[k + j] = (current_.local[j] + current_.federated[j]) * config_.classes[j].departure_rate;
        total += rates_[j] + rates_[k + j];
    }
    clock_ += rng_.exponential(total);
    const double u = rng_.uniform() * total;
    double acc = 0.0;
    std::size_t pick = 0;
    for (; pick < rates_.size(); ++pick) {
        acc += rates_[pick];
        if (u < acc && rates_[pick] > 0.0) break;
    }
    if (pick == rates_.size()) {
        // u landed on the rounding edge; take the last event with positive rate.
        pick = rates_.size() - 1;
        while (rates_[pick] <= 0.0) --pick;
    }
    if (pick < k) {
        current_.event = EventMark{static_cast<int>(pick), EventKind::Arrival};
        ++demands_seen_;
    } else {
        current_.event = EventMark{static_cast<int>(pick - k), EventKind::Departure};
    }
    current_key_ = codec_.encode(current_);
}

Environment::Step Environment::step(Action action) {
    if (!ready_) throw LifecycleError("step called before reset");
    if (!valid_actions(current_, config_).contains(action))
        throw InvalidActionError("action '" + std::string(to_string(action)) + "' is not legal in state " +
                                 to_string(current_));
    const double reward = action_reward(current_.event, action, config_);
    if (trace_) {
        nlohmann::json line{{"step", steps_},
                            {"clock", clock_},
                            {"state", {{"l", current_.local}, {"f", current_.federated},
                                       {"event", (current_.is_arrival() ? "+" : "-") +
                                                     std::to_string(current_.event.class_index + 1)}}},
                            {"action", std::string(to_string(action))},
                            {"reward", reward}};
        *trace_ << line.dump() << '\n';
    }
    const auto i = static_cast<std::size_t>(current_.event.class_index);
    std::optional<Domain> departed;
    if (current_.is_departure()) {
        const int local = current_.local[i];
        const int active = local + current_.federated[i];
        if (rng_.uniform() * active < local) {
            --current_.local[i];
            departed = Domain::Local;
        } else {
            --current_.federated[i];
            departed = Domain::Provider;
        }
    } else if (action == Action::Accept) {
        ++current_.local[i];
    } else if (action == Action::Federate) {
        ++current_.federated[i];
    }
    ++steps_;
    draw_next_event();
    return Step{current_, reward, departed};
}

std::uint64_t DecisionCounts::total_accepted() const { return std::accumulate(accepted.begin(), accepted.end(), std::uint64_t{0}); }
std::uint64_t DecisionCounts::total_federated() const { return std::accumulate(federated.begin(), federated.end(), std::uint64_t{0}); }
std::uint64_t DecisionCounts::total_rejected() const { return std::accumulate(rejected.begin(), rejected.end(), std::uint64_t{0}); }

void DecisionCounts::add(const DecisionCounts& other) {
    if (accepted.size() < other.accepted.size()) {
        accepted.resize(other.accepted.size());
        federated.resize(other.accepted.size());
        rejected.resize(other.accepted.size());
    }
    for (std::size_t i = 0; i < other.accepted.size(); ++i) {
        accepted[i] += other.accepted[i];
        federated[i] += other.federated[i];
        rejected[i] += other.rejected[i];
    }
}

RunResult run_policy(const Policy& policy, const SystemConfig& config, std::uint64_t num_demands,
                     std::uint64_t seed, const RunOptions& options) {
    Environment env(config);
    env.set_trace(options.trace);
    env.reset(seed);

    RunResult result;
    result.counts = DecisionCounts(config.num_classes());
    if (options.record_outcomes) result.outcomes.reserve(num_demands);

    // Active outcome indices per (domain, class). The departing demand is a
    // uniform pick among them, drawn from a separate stream so recording does
    // not perturb the trajectory.
    Rng identity_rng(derive_seed({seed, label_id("demand-identity")}));
    std::vector<std::vector<std::size_t>> active_local(config.num_classes());
    std::vector<std::vector<std::size_t>> active_provider(config.num_classes());

    while (result.num_demands < num_demands) {
        const State& s = env.current();
        const auto cls = static_cast<std::size_t>(s.event.class_index);
        Action action = Action::NoAction;
        if (s.is_arrival()) {
            if (auto mapped = policy.find(env.current_key())) {
                action = *mapped;
            } else if (options.greedy_fallback) {
                action = greedy_action(s, config);
                ++result.fallbacks;
            } else {
                throw IncompletePolicyError("policy has no action for state " + to_string(s));
            }
        }
        const double now = env.clock();
        const auto step = env.step(action);
        if (action == Action::NoAction) {
            if (options.record_outcomes && step.departed_from) {
                auto& pool = *step.departed_from == Domain::Local ? active_local[cls] : active_provider[cls];
                if (!pool.empty()) {
                    const std::size_t pick = identity_rng.index(pool.size());
                    result.outcomes[pool[pick]].end_time = now;
                    pool[pick] = pool.back();
                    pool.pop_back();
                }
            }
            continue;
        }
        ++result.num_demands;
        result.total_profit += step.reward;
        switch (action) {
        case Action::Accept: ++result.counts.accepted[cls]; break;
        case Action::Federate: ++result.counts.federated[cls]; break;
        default: ++result.counts.rejected[cls]; break;
        }
        if (options.record_outcomes) {
            result.outcomes.push_back(DemandOutcome{static_cast<int>(cls), action, step.reward, now, std::nullopt});
            if (action == Action::Accept) active_local[cls].push_back(result.outcomes.size() - 1);
            if (action == Action::Federate) active_provider[cls].push_back(result.outcomes.size() - 1);
        }
    }
    result.steps = env.steps_taken();
    result.profit_per_demand = result.num_demands ? result.total_profit / static_cast<double>(result.num_demands) : 0.0;
    return result;
}

} // namespace fedadm
