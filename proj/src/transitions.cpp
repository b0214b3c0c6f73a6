#include "fedadm/transitions.hpp"

#include "fedadm/errors.hpp"

namespace fedadm {

namespace {

// Appends the next-event expansion of occupancy (l, f), scaled by `weight`.
void expand_next_events(const std::vector<int>& local, const std::vector<int>& federated, double weight,
                        double reward, const SystemConfig& config, std::vector<TransitionEntry>& out) {
    const RateSummary rates = rate_summary(local, federated, config);
    const double total = rates.total_arrival_rate + rates.total_departure_rate;
    auto add = [&](EventMark mark, double p) {
        if (p <= 0.0) return;
        State next{local, federated, mark};
        for (auto& e : out) {
            if (e.next == next) {
                e.probability += p;
                return;
            }
        }
        out.push_back(TransitionEntry{std::move(next), p, reward});
    };
    const std::size_t k = config.num_classes();
    for (std::size_t j = 0; j < k; ++j)
        add(EventMark{static_cast<int>(j), EventKind::Arrival}, weight * config.effective_arrival_rate(j) / total);
    for (std::size_t j = 0; j < k; ++j) {
        const int active = local[j] + federated[j];
        if (active >= 1)
            add(EventMark{static_cast<int>(j), EventKind::Departure},
                weight * active * config.classes[j].departure_rate / total);
    }
}

} // namespace

RateSummary rate_summary(std::span<const int> local, std::span<const int> federated, const SystemConfig& config) {
    RateSummary r;
    r.total_arrival_rate = config.total_arrival_rate();
    for (std::size_t i = 0; i < config.num_classes(); ++i)
        r.total_departure_rate += (local[i] + federated[i]) * config.classes[i].departure_rate;
    return r;
}

std::vector<TransitionEntry> transition_distribution(const State& s, Action action, const SystemConfig& config) {
    ActionEffect effect = apply_action(s, action, config);
    std::vector<TransitionEntry> out;
    if (s.is_arrival()) {
        expand_next_events(effect.local, effect.federated, 1.0, effect.reward, config, out);
        return out;
    }
    const auto i = static_cast<std::size_t>(s.event.class_index);
    const double active = s.local[i] + s.federated[i];
    if (s.local[i] > 0) {
        auto local = effect.local;
        --local[i];
        expand_next_events(local, effect.federated, s.local[i] / active, 0.0, config, out);
    }
    if (s.federated[i] > 0) {
        auto federated = effect.federated;
        --federated[i];
        expand_next_events(effect.local, federated, s.federated[i] / active, 0.0, config, out);
    }
    return out;
}

TransitionModel::TransitionModel(const StateSpace& space) : space_(&space) {
    const auto& config = space.config();
    const std::size_t n = space.size();
    legal_.resize(n);
    offsets_.assign(n * kNumActions + 1, 0);
    rewards_.assign(n * kNumActions, 0.0);
    next_.reserve(n * 8);
    probability_.reserve(n * 8);
    for (StateId s = 0; s < n; ++s) {
        const State& state = space.state(s);
        legal_[s] = valid_actions(state, config);
        for (std::size_t a = 0; a < kNumActions; ++a) {
            const auto action = static_cast<Action>(a);
            const std::size_t k = slot(s, action);
            offsets_[k] = next_.size();
            if (!legal_[s].contains(action)) continue;
            for (const auto& entry : transition_distribution(state, action, config)) {
                const StateId id = space.find(entry.next);
                if (id == space.size())
                    throw NumericalError("successor " + to_string(entry.next) + " of " + to_string(state) +
                                         " is not in the state space");
                next_.push_back(id);
                probability_.push_back(entry.probability);
                rewards_[k] = entry.reward;
            }
        }
    }
    offsets_[n * kNumActions] = next_.size();
}

TransitionModel::Row TransitionModel::row(StateId s, Action a) const {
    const std::size_t k = slot(s, a);
    const std::size_t begin = offsets_[k];
    const std::size_t end = offsets_[k + 1];
    return Row{std::span<const StateId>(next_).subspan(begin, end - begin),
               std::span<const double>(probability_).subspan(begin, end - begin), rewards_[k]};
}

} // namespace fedadm
