#include "fedadm/state_space.hpp"

#include "fedadm/errors.hpp"

#include <limits>

namespace fedadm {

namespace {

constexpr std::uint64_t kKeyLimit = std::numeric_limits<std::uint64_t>::max();

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > kKeyLimit / a) throw TractabilityError("state key space exceeds 64 bits");
    return a * b;
}

void extend(const SystemConfig& config, int remaining, std::size_t cls, std::vector<int>& prefix,
            std::vector<std::vector<int>>& out) {
    if (cls == config.num_classes()) {
        out.push_back(prefix);
        return;
    }
    const int w = config.classes[cls].resource_demand;
    for (int n = 0; n * w <= remaining; ++n) {
        prefix[cls] = n;
        extend(config, remaining - n * w, cls + 1, prefix, out);
    }
    prefix[cls] = 0;
}

} // namespace

StateCodec::StateCodec(const SystemConfig& config) {
    std::uint64_t span = 2 * config.num_classes();
    for (const auto& c : config.classes) {
        local_radix_.push_back(static_cast<std::uint64_t>(config.local_capacity / c.resource_demand) + 1);
        federated_radix_.push_back(static_cast<std::uint64_t>(config.provider_capacity / c.resource_demand) + 1);
        span = checked_mul(span, local_radix_.back());
        span = checked_mul(span, federated_radix_.back());
    }
}

StateKey StateCodec::encode(const State& s) const {
    std::uint64_t key = 0;
    for (std::size_t i = num_classes(); i-- > 0;) {
        key = key * local_radix_[i] + static_cast<std::uint64_t>(s.local[i]);
        key = key * federated_radix_[i] + static_cast<std::uint64_t>(s.federated[i]);
    }
    const std::uint64_t event = static_cast<std::uint64_t>(s.event.class_index) * 2 +
                                (s.event.kind == EventKind::Departure ? 1 : 0);
    return StateKey{key * (2 * num_classes()) + event};
}

State StateCodec::decode(StateKey packed) const {
    auto key = static_cast<std::uint64_t>(packed);
    State s;
    const std::uint64_t event = key % (2 * num_classes());
    key /= 2 * num_classes();
    s.event.class_index = static_cast<int>(event / 2);
    s.event.kind = (event % 2) ? EventKind::Departure : EventKind::Arrival;
    s.local.resize(num_classes());
    s.federated.resize(num_classes());
    for (std::size_t i = 0; i < num_classes(); ++i) {
        s.federated[i] = static_cast<int>(key % federated_radix_[i]);
        key /= federated_radix_[i];
        s.local[i] = static_cast<int>(key % local_radix_[i]);
        key /= local_radix_[i];
    }
    return s;
}

std::vector<std::vector<int>> feasible_count_vectors(const SystemConfig& config, int capacity) {
    std::vector<std::vector<int>> out;
    std::vector<int> prefix(config.num_classes(), 0);
    extend(config, capacity, 0, prefix, out);
    return out;
}

StateSpace::StateSpace(const SystemConfig& config) : config_(config), codec_(config) {}

StateSpace StateSpace::enumerate(const SystemConfig& config, std::size_t max_states) {
    config.validate();
    StateSpace space(config);
    const auto locals = feasible_count_vectors(config, config.local_capacity);
    const auto federated = feasible_count_vectors(config, config.provider_capacity);
    space.num_local_vectors_ = locals.size();
    space.num_federated_vectors_ = federated.size();

    const std::size_t k = config.num_classes();
    // Every (l, f) pair carries at least k arrival states.
    if (locals.size() * federated.size() * k > max_states)
        throw TractabilityError("state space exceeds ceiling of " + std::to_string(max_states) + " states");

    for (const auto& l : locals) {
        for (const auto& f : federated) {
            for (std::size_t i = 0; i < k; ++i)
                space.states_.push_back(State{l, f, EventMark{static_cast<int>(i), EventKind::Arrival}});
            for (std::size_t i = 0; i < k; ++i)
                if (l[i] + f[i] >= 1)
                    space.states_.push_back(State{l, f, EventMark{static_cast<int>(i), EventKind::Departure}});
            if (space.states_.size() > max_states)
                throw TractabilityError("state space exceeds ceiling of " + std::to_string(max_states) + " states");
        }
    }

    space.keys_.reserve(space.states_.size());
    space.index_.reserve(space.states_.size());
    for (StateId id = 0; id < space.states_.size(); ++id) {
        const StateKey key = space.codec_.encode(space.states_[id]);
        space.keys_.push_back(key);
        space.index_.emplace(key, id);
    }
    for (std::size_t i = 0; i < k; ++i)
        space.empty_arrivals_.push_back(space.find(empty_arrival_state(config, static_cast<int>(i))));
    return space;
}

StateId StateSpace::find(StateKey key) const {
    const auto it = index_.find(key);
    return it == index_.end() ? static_cast<StateId>(size()) : it->second;
}

} // namespace fedadm
