#include "fedadm/dp.hpp"

#include "fedadm/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace fedadm {

std::string_view to_string(DiscountClock clock) {
    return clock == DiscountClock::PerDemand ? "per_demand" : "per_transition";
}

DiscountClock discount_clock_from_string(std::string_view name) {
    if (name == "per_demand") return DiscountClock::PerDemand;
    if (name == "per_transition") return DiscountClock::PerTransition;
    throw ConfigError("unknown discount clock '" + std::string(name) + "' (expected per_demand or per_transition)");
}

double step_discount(StateId s, const DpParams& params, const TransitionModel& model) {
    if (params.clock == DiscountClock::PerDemand && model.space().state(s).is_departure()) return 1.0;
    return params.discount;
}

void DpParams::validate() const {
    if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("discount must be in [0, 1)");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
    if (max_eval_sweeps == 0 || max_improvement_rounds == 0) throw ConfigError("iteration caps must be >= 1");
    if (!(improvement_margin >= 0.0)) throw ConfigError("improvement margin must be >= 0");
}

ActionTable reject_all_table(const StateSpace& space) {
    ActionTable table(space.size());
    for (StateId s = 0; s < space.size(); ++s)
        table[s] = space.state(s).is_arrival() ? Action::Reject : Action::NoAction;
    return table;
}

double backup(StateId s, Action a, const ValueTable& values, double discount, const TransitionModel& model) {
    const auto row = model.row(s, a);
    double future = 0.0;
    for (std::size_t k = 0; k < row.next.size(); ++k) future += row.probability[k] * values[row.next[k]];
    // Row probabilities sum to 1, so the reward term factors out.
    return row.reward + discount * future;
}

EvaluationStats policy_evaluation(const ActionTable& policy, ValueTable& values, const DpParams& params,
                                  const TransitionModel& model) {
    params.validate();
    if (policy.size() != model.num_states())
        throw IncompletePolicyError("policy covers " + std::to_string(policy.size()) + " of " +
                                    std::to_string(model.num_states()) + " states");
    values.resize(model.num_states(), 0.0);
    EvaluationStats stats;
    while (true) {
        double delta = 0.0;
        for (StateId s = 0; s < model.num_states(); ++s) {
            const double old = values[s];
            values[s] = backup(s, policy[s], values, step_discount(s, params, model), model);
            delta = std::max(delta, std::abs(values[s] - old));
        }
        ++stats.sweeps;
        stats.final_delta = delta;
        if (delta <= params.tolerance) return stats;
        if (stats.sweeps >= params.max_eval_sweeps) {
            std::ostringstream msg;
            msg << "policy evaluation did not converge after " << stats.sweeps << " sweeps (delta " << delta << ")";
            throw ConvergenceError(msg.str());
        }
    }
}

namespace {

// Highest-priority action within `margin` of the best backup, except that the
// current action is kept when it is within `margin` itself. Without the
// margin, near-ties flip on evaluation error and the iteration can cycle.
Action best_action(StateId s, Action current, const ValueTable& values, double discount, double margin,
                   const TransitionModel& model) {
    const ActionSet legal = model.legal(s);
    std::array<double, kNumActions> value{};
    double top = -std::numeric_limits<double>::infinity();
    for (Action a : kActionPriority) {
        if (!legal.contains(a)) continue;
        value[static_cast<std::size_t>(a)] = backup(s, a, values, discount, model);
        top = std::max(top, value[static_cast<std::size_t>(a)]);
    }
    if (legal.contains(current) && value[static_cast<std::size_t>(current)] >= top - margin) return current;
    for (Action a : kActionPriority)
        if (legal.contains(a) && value[static_cast<std::size_t>(a)] >= top - margin) return a;
    return Action::NoAction;
}

} // namespace

Improvement policy_improvement(const ValueTable& values, const ActionTable& current, const DpParams& params,
                               const TransitionModel& model) {
    const auto n = static_cast<std::ptrdiff_t>(model.num_states());
    Improvement out;
    out.policy.resize(model.num_states());
    bool changed = false;
    if (params.backend == Backend::Parallel) {
#pragma omp parallel for schedule(static) reduction(|| : changed)
        for (std::ptrdiff_t s = 0; s < n; ++s) {
            const auto id = static_cast<StateId>(s);
            out.policy[id] = best_action(id, current[id], values, step_discount(id, params, model), params.improvement_margin, model);
            changed = changed || out.policy[id] != current[id];
        }
    } else {
        for (std::ptrdiff_t s = 0; s < n; ++s) {
            const auto id = static_cast<StateId>(s);
            out.policy[id] = best_action(id, current[id], values, step_discount(id, params, model), params.improvement_margin, model);
            changed = changed || out.policy[id] != current[id];
        }
    }
    out.changed = changed;
    return out;
}

PolicyIterationResult policy_iteration(const DpParams& params, const TransitionModel& model,
                                       const RoundObserver& observer) {
    params.validate();
    PolicyIterationResult result;
    result.actions = reject_all_table(model.space());
    result.values.assign(model.num_states(), 0.0);
    while (true) {
        const EvaluationStats stats = policy_evaluation(result.actions, result.values, params, model);
        result.total_sweeps += stats.sweeps;
        result.final_delta = stats.final_delta;
        if (observer) observer(result.iterations, result.actions, result.values);

        Improvement next = policy_improvement(result.values, result.actions, params, model);
        ++result.iterations;
        if (!next.changed) return result;
        if (result.iterations >= params.max_improvement_rounds) {
            std::size_t diff = 0;
            for (std::size_t s = 0; s < next.policy.size(); ++s) diff += next.policy[s] != result.actions[s];
            throw ConvergenceError("policy iteration did not stabilize after " + std::to_string(result.iterations) +
                                   " rounds; last two policies differ in " + std::to_string(diff) + " states");
        }
        result.actions = std::move(next.policy);
    }
}

} // namespace fedadm
