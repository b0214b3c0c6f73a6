#include "fedadm/config_io.hpp"
#include "fedadm/errors.hpp"
#include "fedadm/model.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace fedadm;

TEST_SUITE("model") {

TEST_CASE("used capacity sums resource demand") {
    const SystemConfig c = default_config();
    CHECK(used_capacity(std::vector<int>{0, 0}, c) == 0);
    CHECK(used_capacity(std::vector<int>{1, 1}, c) == 6);
    CHECK(used_capacity(std::vector<int>{13, 1}, c) == 30);
    CHECK_THROWS_AS(used_capacity(std::vector<int>{1}, c), ConfigError);
}

TEST_CASE("valid actions follow remaining capacity") {
    const SystemConfig c = default_config();
    State s{{0, 0}, {0, 0}, {0, EventKind::Arrival}};
    const ActionSet all = valid_actions(s, c);
    CHECK(all.size() == 3);
    CHECK(all.contains(Action::Accept));
    CHECK(all.contains(Action::Federate));
    CHECK(all.contains(Action::Reject));

    s.local = {13, 1};
    const ActionSet no_local = valid_actions(s, c);
    CHECK(no_local.size() == 2);
    CHECK_FALSE(no_local.contains(Action::Accept));
    CHECK(no_local.contains(Action::Federate));

    s.federated = {8, 1};
    const ActionSet reject_only = valid_actions(s, c);
    CHECK(reject_only.size() == 1);
    CHECK(reject_only.contains(Action::Reject));

    const State dep{{1, 0}, {0, 0}, {0, EventKind::Departure}};
    const ActionSet forced = valid_actions(dep, c);
    CHECK(forced.size() == 1);
    CHECK(forced.contains(Action::NoAction));
}

TEST_CASE("action members come in tie-break order") {
    ActionSet set;
    set.insert(Action::Reject);
    set.insert(Action::Federate);
    set.insert(Action::Accept);
    CHECK(set.members() == std::vector<Action>{Action::Accept, Action::Federate, Action::Reject});
}

TEST_CASE("rewards of each decision") {
    const SystemConfig c = default_config();
    const EventMark c1{0, EventKind::Arrival};
    const EventMark c2{1, EventKind::Arrival};
    CHECK(action_reward(c1, Action::Accept, c) == 100.0);
    CHECK(action_reward(c1, Action::Federate, c) == 70.0);
    CHECK(action_reward(c2, Action::Federate, c) == 15.0);
    CHECK(action_reward(c2, Action::Reject, c) == 0.0);

    SystemConfig scaled = c;
    scaled.cost_scale = 2.0;
    CHECK(action_reward(c1, Action::Federate, scaled) == 40.0);
}

TEST_CASE("apply_action updates occupancy") {
    const SystemConfig c = default_config();
    const State s{{1, 0}, {0, 2}, {1, EventKind::Arrival}};

    const auto rejected = apply_action(s, Action::Reject, c);
    CHECK(rejected.local == s.local);
    CHECK(rejected.federated == s.federated);
    CHECK(rejected.reward == 0.0);

    const auto accepted = apply_action(s, Action::Accept, c);
    CHECK(accepted.local == std::vector<int>{1, 1});
    CHECK(accepted.reward == 20.0);

    const auto federated = apply_action(s, Action::Federate, c);
    CHECK(federated.federated == std::vector<int>{0, 3});
    CHECK(federated.reward == 15.0);

    const State full{{13, 1}, {0, 0}, {0, EventKind::Arrival}};
    CHECK_THROWS_AS(apply_action(full, Action::Accept, c), InvalidActionError);
    CHECK_THROWS_AS(apply_action(full, Action::NoAction, c), InvalidActionError);
}

TEST_CASE("state validity") {
    const SystemConfig c = default_config();
    CHECK(is_valid_state({{13, 1}, {8, 1}, {1, EventKind::Arrival}}, c));
    CHECK_FALSE(is_valid_state({{14, 1}, {0, 0}, {0, EventKind::Arrival}}, c));
    CHECK_FALSE(is_valid_state({{0, 0}, {0, 0}, {0, EventKind::Departure}}, c));
    CHECK(is_valid_state({{0, 0}, {1, 0}, {0, EventKind::Departure}}, c));
    CHECK_FALSE(is_valid_state({{0, 0}, {0, 0}, {2, EventKind::Arrival}}, c));
    CHECK_FALSE(is_valid_state({{-1, 0}, {0, 0}, {0, EventKind::Arrival}}, c));
}

TEST_CASE("config validation rejects bad values") {
    SystemConfig c = default_config();
    CHECK_NOTHROW(c.validate());
    CHECK(c.offered_load() == doctest::Approx(45.0));
    CHECK(c.total_arrival_rate() == doctest::Approx(15.0));

    SystemConfig bad = c;
    bad.classes[0].arrival_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.classes[1].resource_demand = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.local_capacity = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.classes.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("config JSON round trip and hash") {
    const SystemConfig c = default_config();
    const SystemConfig back = parse_config(config_to_json(c));
    CHECK(back == c);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);

    SystemConfig other = c;
    other.local_capacity = 31;
    CHECK(config_hash(other) != config_hash(c));

    const SystemConfig file = load_config(FEDADM_SOURCE_DIR "/configs/default.json");
    CHECK(file == c);

    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"lc": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"lc": 1, "pc": 0, "classes": [{"lambda": 1}]})"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("action names round trip") {
    for (Action a : {Action::Reject, Action::Accept, Action::Federate, Action::NoAction})
        CHECK(action_from_string(to_string(a)) == a);
    CHECK_THROWS_AS(action_from_string("admit"), ConfigError);
}

TEST_CASE("state text form numbers classes from 1") {
    CHECK(to_string(State{{1, 0}, {0, 2}, {1, EventKind::Departure}}) == "[(1,0) (0,2) -e2]");
}

}
