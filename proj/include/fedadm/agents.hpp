#pragma once

#include "fedadm/backend.hpp"
#include "fedadm/env.hpp"
#include "fedadm/policy.hpp"
#include "fedadm/rng.hpp"

#include <array>
#include <functional>
#include <unordered_map>
#include <vector>

namespace fedadm {

// Accept if it fits locally, else federate if it fits in the quota, else
// reject. NoAction on departure states.
Action greedy_action(const State& s, const SystemConfig& config);
Policy greedy_policy(const StateSpace& space);

// Tabular state-action values. Entries exist only for states that were
// updated; lookups of other states read as zero.
class QTable {
public:
    struct Entry {
        std::array<double, kNumActions> value{};
        ActionSet legal;

        double max_value() const;
        // Argmax over legal actions, ties Accept > Federate > Reject.
        Action best_action() const;
    };

    // Creates a zero entry on first touch.
    Entry& touch(StateKey key, ActionSet legal);
    const Entry* find(StateKey key) const;

    // max over legal a' of Q[key, a']; zero for unseen states.
    double max_value(StateKey key) const;

    std::size_t size() const { return entries_.size(); }
    const std::unordered_map<StateKey, Entry>& entries() const { return entries_; }

    // Greedy readout over every stored state.
    Policy readout() const;

    bool all_finite() const;

private:
    std::unordered_map<StateKey, Entry> entries_;
};

// With probability epsilon a uniform legal action, otherwise the argmax of
// the stored values (all-zero for unseen states).
Action epsilon_greedy(const QTable& table, StateKey key, ActionSet legal, double epsilon, Rng& rng);

// Q[s,a] <- (1 - alpha) Q[s,a] + alpha (reward + gamma * next_max)
void q_update(QTable::Entry& entry, Action a, double reward, double next_max, double alpha, double gamma);

// Q[s,a] <- (1 - alpha) Q[s,a] + alpha ((reward - rho) + next_max); then, if
// the taken action is greedy in s, rho <- (1 - beta) rho + beta (reward -
// max_a Q[s,a] + next_max). Returns whether rho was updated.
bool r_update(QTable::Entry& entry, Action a, double reward, double next_max, double alpha, double beta,
              double& rho);

enum class EpisodeUnit { Steps, Demands };

struct LearningParams {
    std::size_t episodes = 200;
    std::size_t steps_per_episode = 4000;
    double alpha = 0.9;
    double epsilon = 0.9;
    double gamma = 0.9; // Q-Learning only
    double beta = 0.9;  // R-Learning only
    double decay = 0.99;
    EpisodeUnit episode_unit = EpisodeUnit::Steps;
    std::uint64_t seed = 0;

    // Optional learning curve: the greedy readout is evaluated after each
    // episode on a fixed held-out seed set.
    bool record_curve = false;
    std::uint64_t curve_demands = 10'000;
    std::size_t curve_seeds = 3;

    void validate() const;
};

struct EvalReport {
    double average_profit = 0.0;
    double half_width = 0.0; // 95% confidence half-width of the mean across seeds
    std::vector<double> per_seed_profit;
    std::vector<std::uint64_t> seeds;
    std::uint64_t num_demands = 0;
    std::uint64_t fallbacks = 0;
    DecisionCounts counts;
    std::optional<double> optimality_gap;
};

struct TrainingResult {
    Policy policy;
    QTable table;
    std::vector<double> rho_series; // R-Learning: rho at the end of each episode
    std::vector<EvalReport> curve;
    double final_alpha = 0.0;
    double final_epsilon = 0.0;
    double final_beta = 0.0;
    std::uint64_t total_steps = 0;
};

// Yields a freshly reset environment for the given episode.
using EnvFactory = std::function<Environment(std::size_t episode)>;

// One environment per episode, reset with a seed derived from (seed, episode).
EnvFactory default_env_factory(const SystemConfig& config, std::uint64_t seed);

TrainingResult q_learning_train(const SystemConfig& config, const LearningParams& params,
                                const EnvFactory& factory = {});
TrainingResult r_learning_train(const SystemConfig& config, const LearningParams& params,
                                const EnvFactory& factory = {});

// (ap_reference - ap) / ap_reference. Throws GapUndefinedError if the
// reference is not positive.
double optimality_gap(double ap_reference, double ap);

// Student-t 95% half-width of the mean of `samples`; zero for fewer than two.
double confidence_half_width(const std::vector<double>& samples);

// Runs the policy once per seed with exploration off. States absent from the
// policy fall back to greedy_action and are counted.
EvalReport evaluate_policy(const Policy& policy, const SystemConfig& config, std::uint64_t num_demands,
                           const std::vector<std::uint64_t>& seeds, Backend backend = Backend::Parallel);

// Fills optimality_gap from a reference profit.
void attach_gap(EvalReport& report, double reference_profit);

// `count` evaluation seeds derived from a base seed.
std::vector<std::uint64_t> evaluation_seeds(std::uint64_t base, std::size_t count);

} // namespace fedadm
