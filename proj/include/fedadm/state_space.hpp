#pragma once

#include "fedadm/model.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace fedadm {

// Packed, config-specific identity of a State. Keys from different configs
// are not comparable.
enum class StateKey : std::uint64_t {};

using StateId = std::uint32_t;

// Mixed-radix packing of (local, federated, event) into 64 bits. Radices come
// from the per-class count bounds implied by the two capacities.
class StateCodec {
public:
    explicit StateCodec(const SystemConfig& config);

    StateKey encode(const State& s) const;
    State decode(StateKey key) const;

    std::size_t num_classes() const { return local_radix_.size(); }

private:
    std::vector<std::uint64_t> local_radix_;
    std::vector<std::uint64_t> federated_radix_;
};

inline constexpr std::size_t kDefaultMaxStates = 5'000'000;

class StateSpace {
public:
    // Every capacity-feasible (l, f) crossed with all arrival marks and the
    // departure marks of classes that have at least one active demand.
    // Throws TractabilityError past max_states.
    static StateSpace enumerate(const SystemConfig& config, std::size_t max_states = kDefaultMaxStates);

    const SystemConfig& config() const { return config_; }
    const StateCodec& codec() const { return codec_; }

    std::size_t size() const { return states_.size(); }
    const State& state(StateId id) const { return states_[id]; }
    const std::vector<State>& states() const { return states_; }
    StateKey key(StateId id) const { return keys_[id]; }

    // Returns size() when absent.
    StateId find(StateKey key) const;
    StateId find(const State& s) const { return is_valid_state(s, config_) ? find(codec_.encode(s)) : size_id(); }
    bool contains(const State& s) const { return find(s) != size(); }

    // Arrival states of the empty system, one per class.
    const std::vector<StateId>& empty_arrival_states() const { return empty_arrivals_; }

    std::size_t num_local_vectors() const { return num_local_vectors_; }
    std::size_t num_federated_vectors() const { return num_federated_vectors_; }

private:
    StateId size_id() const { return static_cast<StateId>(states_.size()); }
    explicit StateSpace(const SystemConfig& config);

    SystemConfig config_;
    StateCodec codec_;
    std::vector<State> states_;
    std::vector<StateKey> keys_;
    std::unordered_map<StateKey, StateId> index_;
    std::vector<StateId> empty_arrivals_;
    std::size_t num_local_vectors_ = 0;
    std::size_t num_federated_vectors_ = 0;
};

// All count vectors c with sum_i c[i] * w_i <= capacity, in lexicographic order.
std::vector<std::vector<int>> feasible_count_vectors(const SystemConfig& config, int capacity);

} // namespace fedadm
