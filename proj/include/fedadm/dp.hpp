#pragma once

#include "fedadm/backend.hpp"
#include "fedadm/policy.hpp"
#include "fedadm/transitions.hpp"

#include <functional>
#include <string_view>
#include <vector>

namespace fedadm {

using ValueTable = std::vector<double>;

// Which transitions the discount factor applies to. PerTransition discounts
// every jump of the embedded chain. PerDemand discounts only transitions out
// of arrival states, so departures are free and gamma -> 1 ranks policies by
// profit per demand instead of profit per jump.
enum class DiscountClock { PerDemand, PerTransition };

std::string_view to_string(DiscountClock clock);
DiscountClock discount_clock_from_string(std::string_view name);

struct DpParams {
    double discount = 0.99;
    DiscountClock clock = DiscountClock::PerDemand;
    double tolerance = 1e-6;
    std::size_t max_eval_sweeps = 1'000'000;
    std::size_t max_improvement_rounds = 1'000;
    double improvement_margin = 1e-6; // a challenger must beat the current action by more than this
    Backend backend = Backend::Parallel; // used by the improvement step

    void validate() const;
};

struct EvaluationStats {
    std::size_t sweeps = 0;
    double final_delta = 0.0;
};

// In-place Gauss-Seidel sweeps over state ids until the largest per-state
// change is <= tolerance. Throws ConvergenceError past max_eval_sweeps.
EvaluationStats policy_evaluation(const ActionTable& policy, ValueTable& values, const DpParams& params,
                                  const TransitionModel& model);

// Discount applied to transitions out of s under the chosen clock.
double step_discount(StateId s, const DpParams& params, const TransitionModel& model);

// Expected one-step backup sum_s' P_a(s,s') (R_a(s) + gamma V(s')).
double backup(StateId s, Action a, const ValueTable& values, double discount, const TransitionModel& model);

struct Improvement {
    ActionTable policy;
    bool changed = false;
};

// Greedy policy w.r.t. `values`. The current action survives unless beaten by
// more than improvement_margin; otherwise ties go Accept > Federate > Reject.
// `changed` compares against `current`.
Improvement policy_improvement(const ValueTable& values, const ActionTable& current, const DpParams& params,
                               const TransitionModel& model);

struct PolicyIterationResult {
    ActionTable actions;
    ValueTable values;
    std::size_t iterations = 0; // improvement rounds
    std::size_t total_sweeps = 0;
    double final_delta = 0.0;
};

// Called after each evaluation with the round number and the evaluated policy.
using RoundObserver = std::function<void(std::size_t round, const ActionTable& policy, const ValueTable& values)>;

// Starts from reject-everywhere with V = 0, so the first improvement is the
// myopic policy. Throws ConvergenceError past max_improvement_rounds.
PolicyIterationResult policy_iteration(const DpParams& params, const TransitionModel& model,
                                       const RoundObserver& observer = {});

// Reject in arrival states, NoAction in departure states.
ActionTable reject_all_table(const StateSpace& space);

} // namespace fedadm
