#pragma once

#include "fedadm/model.hpp"
#include "fedadm/state_space.hpp"

#include <span>
#include <vector>

namespace fedadm {

struct TransitionEntry {
    State next;
    double probability = 0.0;
    double reward = 0.0;
};

struct RateSummary {
    double total_arrival_rate = 0.0;   // sum of effective lambda_i
    double total_departure_rate = 0.0; // sum of (l[i] + f[i]) * mu_i
};

RateSummary rate_summary(std::span<const int> local, std::span<const int> federated, const SystemConfig& config);

// Exact one-step law of the next state under (state, action): the decision
// is applied first, a departing demand is removed from the local or the
// provider domain in proportion to its counts, then the next event is drawn
// by competing exponentials using the post-decision rates. Zero-probability
// entries are dropped and coincident next states merged.
std::vector<TransitionEntry> transition_distribution(const State& s, Action action, const SystemConfig& config);

// Every legal (state, action) row of a StateSpace, resolved to state ids.
class TransitionModel {
public:
    explicit TransitionModel(const StateSpace& space);

    struct Row {
        std::span<const StateId> next;
        std::span<const double> probability;
        double reward;
    };

    const StateSpace& space() const { return *space_; }
    const SystemConfig& config() const { return space_->config(); }
    std::size_t num_states() const { return space_->size(); }

    ActionSet legal(StateId s) const { return legal_[s]; }
    // Precondition: legal(s).contains(a).
    Row row(StateId s, Action a) const;

    std::size_t num_entries() const { return next_.size(); }

private:
    std::size_t slot(StateId s, Action a) const { return static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(a); }

    const StateSpace* space_;
    std::vector<ActionSet> legal_;
    std::vector<std::size_t> offsets_; // kNumActions slots per state, +1
    std::vector<double> rewards_;
    std::vector<StateId> next_;
    std::vector<double> probability_;
};

} // namespace fedadm
