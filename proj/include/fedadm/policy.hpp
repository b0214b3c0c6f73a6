#pragma once

#include "fedadm/model.hpp"
#include "fedadm/state_space.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fedadm {

// Dense action per state id of a StateSpace.
using ActionTable = std::vector<Action>;

// State -> action map keyed by StateKey. Full for DP and greedy policies,
// partial (visited states only) for learned ones.
class Policy {
public:
    void set(StateKey key, Action a) { actions_[key] = a; }
    std::optional<Action> find(StateKey key) const {
        const auto it = actions_.find(key);
        if (it == actions_.end()) return std::nullopt;
        return it->second;
    }
    std::size_t size() const { return actions_.size(); }
    void reserve(std::size_t n) { actions_.reserve(n); }
    const std::unordered_map<StateKey, Action>& entries() const { return actions_; }

    static Policy from_table(const StateSpace& space, const ActionTable& table);

    // Throws IncompletePolicyError when a state of the space has no action
    // and InvalidActionError when a mapped action is illegal.
    ActionTable to_table(const StateSpace& space) const;

private:
    std::unordered_map<StateKey, Action> actions_;
};

struct PolicyFile {
    Policy policy;
    std::string source;      // "dp", "greedy", "q", "r"
    std::string config_hash;
};

// {"format": "fedadm-policy/1", "config_hash": ..., "source": ...,
//  "num_states": N, "actions": {"<state id>": "<action name>", ...}}
void save_policy(const std::filesystem::path& path, const Policy& policy, const StateSpace& space,
                 const std::string& source);

// Rejects files whose config hash differs from the space's config.
PolicyFile load_policy(const std::filesystem::path& path, const StateSpace& space);

} // namespace fedadm
