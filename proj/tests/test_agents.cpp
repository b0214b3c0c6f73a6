#include "fedadm/agents.hpp"
#include "fedadm/errors.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace fedadm;

namespace {

ActionSet arrival_actions() {
    ActionSet s;
    s.insert(Action::Reject);
    s.insert(Action::Accept);
    s.insert(Action::Federate);
    return s;
}

} // namespace

TEST_SUITE("agents") {

TEST_CASE("greedy decisions") {
    const SystemConfig c = default_config();
    CHECK(greedy_action({{0, 0}, {0, 0}, {0, EventKind::Arrival}}, c) == Action::Accept);
    CHECK(greedy_action({{13, 1}, {0, 0}, {0, EventKind::Arrival}}, c) == Action::Federate);
    CHECK(greedy_action({{13, 1}, {8, 1}, {0, EventKind::Arrival}}, c) == Action::Reject);
    CHECK(greedy_action({{13, 1}, {8, 1}, {0, EventKind::Departure}}, c) == Action::NoAction);
}

TEST_CASE("epsilon-greedy selection") {
    QTable table;
    const StateKey key{42};
    const ActionSet legal = arrival_actions();
    Rng rng(1);

    CHECK(epsilon_greedy(table, key, legal, 0.0, rng) == Action::Accept);

    table.touch(key, legal).value[static_cast<std::size_t>(Action::Federate)] = 5.0;
    for (int i = 0; i < 100; ++i) CHECK(epsilon_greedy(table, key, legal, 0.0, rng) == Action::Federate);

    std::array<int, kNumActions> freq{};
    const int draws = 30'000;
    for (int i = 0; i < draws; ++i) ++freq[static_cast<std::size_t>(epsilon_greedy(table, key, legal, 1.0, rng))];
    for (Action a : legal.members()) CHECK(std::abs(freq[static_cast<std::size_t>(a)] / double(draws) - 1.0 / 3.0) < 0.02);
    CHECK(freq[static_cast<std::size_t>(Action::NoAction)] == 0);
}

TEST_CASE("single Q-Learning update") {
    QTable table;
    auto& entry = table.touch(StateKey{1}, arrival_actions());
    q_update(entry, Action::Accept, 100.0, table.max_value(StateKey{2}), 0.9, 0.9);
    CHECK(entry.value[static_cast<std::size_t>(Action::Accept)] == 90.0);
    CHECK(entry.best_action() == Action::Accept);
    CHECK(table.max_value(StateKey{1}) == 90.0);
    CHECK(table.max_value(StateKey{2}) == 0.0);
}

TEST_CASE("single R-Learning update") {
    QTable table;
    auto& entry = table.touch(StateKey{1}, arrival_actions());
    double rho = 0.0;
    CHECK(r_update(entry, Action::Accept, 100.0, 0.0, 0.9, 0.9, rho));
    CHECK(entry.value[static_cast<std::size_t>(Action::Accept)] == 90.0);
    CHECK(rho == 9.0);

    QTable fresh;
    auto& zero = fresh.touch(StateKey{1}, arrival_actions());
    double rho0 = 0.0;
    r_update(zero, Action::Reject, 0.0, 0.0, 0.9, 0.9, rho0);
    CHECK(zero.value[static_cast<std::size_t>(Action::Reject)] == 0.0);
    CHECK(rho0 == 0.0);
}

TEST_CASE("rho skips non-greedy updates") {
    QTable table;
    auto& entry = table.touch(StateKey{1}, arrival_actions());
    entry.value[static_cast<std::size_t>(Action::Accept)] = 50.0;
    double rho = 3.0;
    CHECK_FALSE(r_update(entry, Action::Reject, 0.0, 0.0, 0.5, 0.5, rho));
    CHECK(rho == 3.0);
}

TEST_CASE("rho converges to the reward of a one-state chain") {
    QTable table;
    ActionSet only;
    only.insert(Action::Accept);
    auto& entry = table.touch(StateKey{7}, only);
    double rho = 0.0;
    for (int i = 0; i < 10'000; ++i) r_update(entry, Action::Accept, 25.0, entry.max_value(), 0.1, 0.1, rho);
    CHECK(std::abs(rho - 25.0) < 1e-3);
}

TEST_CASE("decay is applied at the start of each episode") {
    LearningParams p;
    p.episodes = 1;
    p.steps_per_episode = 10;
    const auto q = q_learning_train(default_config(), p);
    CHECK(q.final_alpha == 0.9 * 0.99);
    CHECK(q.final_alpha == doctest::Approx(0.891));
    CHECK(q.final_epsilon == 0.9 * 0.99);
    const auto r = r_learning_train(default_config(), p);
    CHECK(r.final_beta == 0.9 * 0.99);
    CHECK(r.rho_series.size() == 1);
}

TEST_CASE("myopic Q-Learning settles on the greedy choice") {
    const SystemConfig c = default_config();
    LearningParams p;
    p.gamma = 0.0;
    p.decay = 1.0;
    p.episodes = 50;
    p.seed = 5;
    const auto result = q_learning_train(c, p);
    const StateCodec codec(c);
    std::size_t compared = 0;
    for (const auto& [key, entry] : result.table.entries()) {
        const State s = codec.decode(key);
        if (s.is_departure()) continue;
        bool all_tried = true;
        for (Action a : entry.legal.members())
            if (action_reward(s.event, a, c) > 0.0 && entry.value[static_cast<std::size_t>(a)] == 0.0) all_tried = false;
        if (!all_tried) continue;
        CHECK(entry.best_action() == greedy_action(s, c));
        ++compared;
    }
    CHECK(compared > 100);
}

TEST_CASE("training is reproducible and finite") {
    LearningParams p;
    p.episodes = 5;
    p.seed = 77;
    const auto a = r_learning_train(default_config(), p);
    const auto b = r_learning_train(default_config(), p);
    CHECK(a.rho_series == b.rho_series);
    CHECK(a.policy.entries() == b.policy.entries());
    CHECK(a.table.all_finite());
    CHECK(a.total_steps == 5 * 4000);
    p.seed = 78;
    CHECK(r_learning_train(default_config(), p).rho_series != a.rho_series);
}

TEST_CASE("demand-counted episodes take more steps") {
    LearningParams p;
    p.episodes = 2;
    p.steps_per_episode = 500;
    p.episode_unit = EpisodeUnit::Demands;
    const auto result = q_learning_train(default_config(), p);
    CHECK(result.total_steps > 2 * 500);
}

TEST_CASE("learning curve has one point per episode") {
    LearningParams p;
    p.episodes = 3;
    p.steps_per_episode = 1000;
    p.record_curve = true;
    p.curve_demands = 1000;
    const auto result = r_learning_train(default_config(), p);
    REQUIRE(result.curve.size() == 3);
    CHECK(result.curve[0].per_seed_profit.size() == p.curve_seeds);
}

TEST_CASE("optimality gap") {
    CHECK(optimality_gap(70.0, 70.0) == 0.0);
    CHECK(optimality_gap(70.0, 0.0) == 1.0);
    CHECK(optimality_gap(80.0, 60.0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(optimality_gap(0.0, 1.0), GapUndefinedError);
    CHECK_THROWS_AS(optimality_gap(-2.0, 1.0), GapUndefinedError);
}

TEST_CASE("confidence half-width uses Student t") {
    // t_{0.975, 4} = 2.7764451051977987, s = sqrt(2.5), n = 5
    CHECK(confidence_half_width({1, 2, 3, 4, 5}) == doctest::Approx(2.7764451051977987 * std::sqrt(0.5)));
    CHECK(confidence_half_width({3.0}) == 0.0);
    CHECK(confidence_half_width({2.0, 2.0, 2.0}) == 0.0);
}

TEST_CASE("evaluation of reference policies") {
    const SystemConfig c = default_config();
    const auto space = StateSpace::enumerate(c);
    const auto seeds = evaluation_seeds(3, 4);
    const Policy greedy = greedy_policy(space);
    EvalReport report = evaluate_policy(greedy, c, 20'000, seeds, Backend::Serial);
    const EvalReport parallel = evaluate_policy(greedy, c, 20'000, seeds, Backend::Parallel);
    CHECK(report.per_seed_profit == parallel.per_seed_profit);
    attach_gap(report, report.average_profit);
    CHECK(*report.optimality_gap == 0.0);

    Policy reject;
    for (StateId s = 0; s < space.size(); ++s)
        reject.set(space.key(s), space.state(s).is_arrival() ? Action::Reject : Action::NoAction);
    EvalReport none = evaluate_policy(reject, c, 20'000, seeds);
    CHECK(none.average_profit == 0.0);
    attach_gap(none, parallel.average_profit);
    CHECK(*none.optimality_gap == 1.0);
    CHECK(none.counts.total_rejected() == 4 * 20'000);
}

TEST_CASE("learning parameter validation") {
    LearningParams p;
    CHECK_NOTHROW(p.validate());
    p.alpha = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.gamma = 1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.episodes = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

}
