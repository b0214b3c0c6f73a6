#include "fedadm/agents.hpp"
#include "fedadm/chain.hpp"
#include "fedadm/dp.hpp"
#include "fedadm/errors.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace fedadm;

namespace {

// Optimal values by plain value iteration on transition_distribution, with no
// use of TransitionModel or the solver.
std::vector<double> value_iteration_oracle(const StateSpace& space, double gamma, DiscountClock clock) {
    struct Option {
        double reward;
        std::vector<std::pair<StateId, double>> next;
    };
    std::vector<std::vector<Option>> options(space.size());
    for (StateId s = 0; s < space.size(); ++s) {
        for (Action a : valid_actions(space.state(s), space.config()).members()) {
            Option o{action_reward(space.state(s).event, a, space.config()), {}};
            for (const auto& e : transition_distribution(space.state(s), a, space.config()))
                o.next.emplace_back(space.find(e.next), e.probability);
            options[s].push_back(std::move(o));
        }
    }
    std::vector<double> v(space.size(), 0.0), next(space.size());
    for (int it = 0; it < 200'000; ++it) {
        double delta = 0.0;
        for (StateId s = 0; s < space.size(); ++s) {
            const double d = clock == DiscountClock::PerDemand && space.state(s).is_departure() ? 1.0 : gamma;
            double best = -1e300;
            for (const auto& o : options[s]) {
                double f = 0.0;
                for (const auto& [id, p] : o.next) f += p * v[id];
                best = std::max(best, o.reward + d * f);
            }
            next[s] = best;
            delta = std::max(delta, std::abs(next[s] - v[s]));
        }
        v.swap(next);
        if (delta < 1e-10) break;
    }
    return v;
}

} // namespace

TEST_SUITE("dp") {

TEST_CASE("reject-all has zero value") {
    const auto space = StateSpace::enumerate(default_config());
    const TransitionModel model(space);
    for (double gamma : {0.0, 0.5, 0.99}) {
        DpParams params;
        params.discount = gamma;
        ValueTable v;
        const auto stats = policy_evaluation(reject_all_table(space), v, params, model);
        CHECK(stats.sweeps == 1);
        for (double x : v) CHECK(x == 0.0);
    }
}

TEST_CASE("gamma zero evaluates immediate rewards") {
    const auto space = StateSpace::enumerate(default_config());
    const TransitionModel model(space);
    const ActionTable greedy = greedy_policy(space).to_table(space);
    for (DiscountClock clock : {DiscountClock::PerDemand, DiscountClock::PerTransition}) {
        DpParams params;
        params.discount = 0.0;
        params.clock = clock;
        ValueTable v;
        policy_evaluation(greedy, v, params, model);
        for (StateId s = 0; s < space.size(); ++s) {
            if (space.state(s).is_departure()) {
                if (clock == DiscountClock::PerTransition) CHECK(v[s] == 0.0);
                continue;
            }
            CHECK(v[s] == action_reward(space.state(s).event, greedy[s], space.config()));
        }
    }
}

TEST_CASE("one discount step per demand gives a geometric series") {
    // No blocking in practice: r / (1 - gamma) per demand stream.
    const auto space = StateSpace::enumerate(testing::single_class(100, 0));
    const TransitionModel model(space);
    DpParams params;
    params.discount = 0.99;
    ValueTable v;
    policy_evaluation(greedy_policy(space).to_table(space), v, params, model);
    CHECK(v[space.empty_arrival_states()[0]] == doctest::Approx(10000.0).epsilon(1e-6));
}

TEST_CASE("improvement from zero values is myopic") {
    const auto space = StateSpace::enumerate(default_config());
    const TransitionModel model(space);
    const ValueTable zero(space.size(), 0.0);
    ValueTable random(space.size());
    Rng rng(7);
    for (double& x : random) x = 1000.0 * rng.uniform();
    DpParams params;
    const auto from_zero = policy_improvement(zero, reject_all_table(space), params, model);
    params.discount = 0.0;
    const auto gamma_zero = policy_improvement(random, reject_all_table(space), params, model);
    CHECK(from_zero.policy == gamma_zero.policy);
    for (StateId s = 0; s < space.size(); ++s) {
        CHECK(from_zero.policy[s] == greedy_action(space.state(s), space.config()));
        if (space.state(s).is_departure()) CHECK(from_zero.policy[s] == Action::NoAction);
    }
}

TEST_CASE("serial and parallel improvement agree") {
    const auto space = StateSpace::enumerate(default_config());
    const TransitionModel model(space);
    DpParams params;
    ValueTable v;
    policy_evaluation(greedy_policy(space).to_table(space), v, params, model);
    params.backend = Backend::Serial;
    const auto serial = policy_improvement(v, reject_all_table(space), params, model);
    params.backend = Backend::Parallel;
    const auto parallel = policy_improvement(v, reject_all_table(space), params, model);
    CHECK(serial.policy == parallel.policy);
    CHECK(serial.changed == parallel.changed);
}

TEST_CASE("costly federation with no local room rejects everything") {
    SystemConfig c = default_config();
    c.local_capacity = 0;
    c.classes[0].federation_cost = 150.0;
    c.classes[1].federation_cost = 25.0;
    const auto space = StateSpace::enumerate(c);
    const TransitionModel model(space);
    const auto result = policy_iteration({}, model);
    for (StateId s = 0; s < space.size(); ++s)
        if (space.state(s).is_arrival()) CHECK(result.actions[s] == Action::Reject);
    CHECK(exact_average_profit(result.actions, model).profit_per_demand == 0.0);
}

TEST_CASE("ample single-class capacity accepts everywhere") {
    const auto space = StateSpace::enumerate(testing::single_class(100, 20));
    const TransitionModel model(space);
    const auto result = policy_iteration({}, model);
    for (StateId s = 0; s < space.size(); ++s)
        if (model.legal(s).contains(Action::Accept)) CHECK(result.actions[s] == Action::Accept);
}

TEST_CASE("policy iteration reaches the value-iteration optimum") {
    const auto space = StateSpace::enumerate(testing::small_two_class(8, 4));
    const TransitionModel model(space);
    for (DiscountClock clock : {DiscountClock::PerDemand, DiscountClock::PerTransition}) {
        DpParams params;
        params.discount = 0.95;
        params.tolerance = 1e-9;
        params.clock = clock;
        const auto result = policy_iteration(params, model);
        const auto oracle = value_iteration_oracle(space, params.discount, clock);
        for (StateId s = 0; s < space.size(); ++s) CHECK(result.values[s] == doctest::Approx(oracle[s]).epsilon(1e-7));
    }
}

TEST_CASE("final policy is a fixed point of improvement") {
    const auto space = StateSpace::enumerate(default_config());
    const TransitionModel model(space);
    const DpParams params;
    std::size_t rounds_seen = 0;
    const auto result = policy_iteration(params, model, [&](std::size_t round, const ActionTable&, const ValueTable&) {
        CHECK(round == rounds_seen);
        ++rounds_seen;
    });
    CHECK(rounds_seen == result.iterations);
    CHECK(result.final_delta <= params.tolerance);
    const auto again = policy_improvement(result.values, result.actions, params, model);
    CHECK_FALSE(again.changed);
}

TEST_CASE("DP beats greedy on the default system") {
    const SystemConfig c = default_config();
    const auto space = StateSpace::enumerate(c);
    const TransitionModel model(space);
    const Policy dp = Policy::from_table(space, policy_iteration({}, model).actions);
    const auto seeds = evaluation_seeds(11, 10);
    const EvalReport dp_report = evaluate_policy(dp, c, 100'000, seeds);
    const EvalReport greedy_report = evaluate_policy(greedy_policy(space), c, 100'000, seeds);
    CHECK(dp_report.average_profit > greedy_report.average_profit);
    CHECK(dp_report.fallbacks == 0);
}

TEST_CASE("per-demand discounting ranks policies by profit per demand") {
    // Larger gamma never lowers the exact profit per demand of the optimum.
    const auto space = StateSpace::enumerate(default_config());
    const TransitionModel model(space);
    double previous = 0.0;
    for (double gamma : {0.5, 0.9, 0.99}) {
        DpParams params;
        params.discount = gamma;
        const double profit = exact_average_profit(policy_iteration(params, model).actions, model).profit_per_demand;
        CHECK(profit >= previous - 1e-9);
        previous = profit;
    }
}

TEST_CASE("free federation converges despite near-ties") {
    SystemConfig c = default_config();
    c.cost_scale = 0.0;
    const auto space = StateSpace::enumerate(c);
    const TransitionModel model(space);
    const auto result = policy_iteration({}, model);
    CHECK(result.iterations < 50);
    CHECK_FALSE(policy_improvement(result.values, result.actions, {}, model).changed);
    CHECK(exact_average_profit(result.actions, model).profit_per_demand >
          exact_average_profit(greedy_policy(space), model).profit_per_demand);
}

TEST_CASE("improvement keeps the current action within the margin") {
    const auto space = StateSpace::enumerate(testing::single_class(4, 4));
    const TransitionModel model(space);
    const StateId s = space.empty_arrival_states().front();
    ValueTable values(space.size(), 0.0);
    // With gamma = 0 the backups are the rewards: Accept 100, Federate 70, Reject 0.
    DpParams params;
    params.discount = 0.0;
    params.improvement_margin = 50.0;
    ActionTable current = reject_all_table(space);
    current[s] = Action::Federate;
    CHECK(policy_improvement(values, current, params, model).policy[s] == Action::Federate);
    params.improvement_margin = 0.0;
    CHECK(policy_improvement(values, current, params, model).policy[s] == Action::Accept);
    current[s] = Action::Reject;
    params.improvement_margin = 50.0;
    // Reject (0) is more than 50 below Accept (100); Federate (70) is within, Accept wins on priority.
    CHECK(policy_improvement(values, current, params, model).policy[s] == Action::Accept);
}

TEST_CASE("parameter validation and caps") {
    DpParams bad;
    bad.discount = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.tolerance = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.improvement_margin = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(discount_clock_from_string(to_string(DiscountClock::PerTransition)) == DiscountClock::PerTransition);
    CHECK_THROWS_AS(discount_clock_from_string("wall"), ConfigError);

    const auto space = StateSpace::enumerate(default_config());
    const TransitionModel model(space);
    DpParams capped;
    capped.max_eval_sweeps = 2;
    ValueTable v;
    CHECK_THROWS_AS(policy_evaluation(greedy_policy(space).to_table(space), v, capped, model), ConvergenceError);
    capped = {};
    capped.max_improvement_rounds = 1;
    CHECK_THROWS_AS(policy_iteration(capped, model), ConvergenceError);
    ActionTable short_table(3, Action::Reject);
    CHECK_THROWS_AS(policy_evaluation(short_table, v, {}, model), IncompletePolicyError);
}

}
