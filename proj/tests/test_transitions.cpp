#include "fedadm/transitions.hpp"

#include "support.hpp"

#include <doctest.h>

#include <map>

using namespace fedadm;

namespace {

using Dist = std::map<std::string, double>;

Dist as_map(const std::vector<TransitionEntry>& entries) {
    Dist out;
    for (const auto& e : entries) out[to_string(e.next)] += e.probability;
    return out;
}

State arrival(std::vector<int> l, std::vector<int> f, int cls) { return {std::move(l), std::move(f), {cls, EventKind::Arrival}}; }
State departure(std::vector<int> l, std::vector<int> f, int cls) {
    return {std::move(l), std::move(f), {cls, EventKind::Departure}};
}

} // namespace

TEST_SUITE("transitions") {

TEST_CASE("reject on the empty system") {
    const auto row = transition_distribution(arrival({0, 0}, {0, 0}, 0), Action::Reject, default_config());
    REQUIRE(row.size() == 2);
    const Dist d = as_map(row);
    CHECK(d.at(to_string(arrival({0, 0}, {0, 0}, 0))) == doctest::Approx(10.0 / 15.0).epsilon(1e-15));
    CHECK(d.at(to_string(arrival({0, 0}, {0, 0}, 1))) == doctest::Approx(5.0 / 15.0).epsilon(1e-15));
    for (const auto& e : row) CHECK(e.reward == 0.0);
}

TEST_CASE("accept on the empty system") {
    const auto row = transition_distribution(arrival({0, 0}, {0, 0}, 0), Action::Accept, default_config());
    REQUIRE(row.size() == 3);
    const Dist d = as_map(row);
    CHECK(d.at(to_string(arrival({1, 0}, {0, 0}, 0))) == doctest::Approx(10.0 / 19.0));
    CHECK(d.at(to_string(arrival({1, 0}, {0, 0}, 1))) == doctest::Approx(5.0 / 19.0));
    CHECK(d.at(to_string(departure({1, 0}, {0, 0}, 0))) == doctest::Approx(4.0 / 19.0));
    for (const auto& e : row) CHECK(e.reward == 100.0);
}

TEST_CASE("departure splits between domains by count") {
    const auto row = transition_distribution(departure({1, 0}, {1, 0}, 0), Action::NoAction, default_config());
    const Dist d = as_map(row);
    // Either branch leaves one class-1 demand, so M = 4 and Lambda + M = 19.
    CHECK(d.at(to_string(arrival({0, 0}, {1, 0}, 0))) == doctest::Approx(0.5 * 10.0 / 19.0));
    CHECK(d.at(to_string(arrival({1, 0}, {0, 0}, 0))) == doctest::Approx(0.5 * 10.0 / 19.0));
    CHECK(d.at(to_string(departure({0, 0}, {1, 0}, 0))) == doctest::Approx(0.5 * 4.0 / 19.0));
    CHECK(d.at(to_string(departure({1, 0}, {0, 0}, 0))) == doctest::Approx(0.5 * 4.0 / 19.0));
    CHECK(row.size() == 6);
}

TEST_CASE("departure branches merge when they coincide") {
    // Only local demands: one branch, weights 1 and 0.
    const auto row = transition_distribution(departure({2, 1}, {0, 0}, 1), Action::NoAction, default_config());
    double total = 0.0;
    for (const auto& e : row) {
        CHECK(e.next.local == std::vector<int>{2, 0});
        CHECK(e.next.federated == std::vector<int>{0, 0});
        total += e.probability;
    }
    CHECK(total == doctest::Approx(1.0));
    // Lambda + M = 15 + 2 * 4.
    CHECK(as_map(row).at(to_string(departure({2, 0}, {0, 0}, 0))) == doctest::Approx(8.0 / 23.0));
}

TEST_CASE("load scale multiplies arrival rates") {
    SystemConfig c = default_config();
    c.load_scale = 2.0;
    const Dist d = as_map(transition_distribution(arrival({0, 0}, {0, 0}, 0), Action::Accept, c));
    CHECK(d.at(to_string(departure({1, 0}, {0, 0}, 0))) == doctest::Approx(4.0 / 34.0));
}

TEST_CASE("model rows sum to one and stay inside the space") {
    const auto space = StateSpace::enumerate(default_config());
    const TransitionModel model(space);
    std::size_t rows = 0;
    for (StateId s = 0; s < space.size(); ++s) {
        const ActionSet legal = model.legal(s);
        CHECK(legal == valid_actions(space.state(s), space.config()));
        for (Action a : legal.members()) {
            const auto row = model.row(s, a);
            double sum = 0.0;
            for (std::size_t k = 0; k < row.next.size(); ++k) {
                REQUIRE(row.next[k] < space.size());
                CHECK(row.probability[k] > 0.0);
                sum += row.probability[k];
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
            ++rows;
        }
    }
    CHECK(model.num_entries() == 85328);
    CHECK(rows == 18424);
}

TEST_CASE("model rows agree with the direct distribution") {
    const auto space = StateSpace::enumerate(testing::small_two_class(10, 6));
    const TransitionModel model(space);
    for (StateId s = 0; s < space.size(); ++s) {
        for (Action a : model.legal(s).members()) {
            const auto direct = transition_distribution(space.state(s), a, space.config());
            const auto row = model.row(s, a);
            REQUIRE(row.next.size() == direct.size());
            for (std::size_t k = 0; k < direct.size(); ++k) {
                CHECK(space.state(row.next[k]) == direct[k].next);
                CHECK(row.probability[k] == direct[k].probability);
            }
            CHECK(row.reward == action_reward(space.state(s).event, a, space.config()));
        }
    }
}

}
