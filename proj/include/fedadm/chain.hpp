#pragma once

#include "fedadm/backend.hpp"
#include "fedadm/policy.hpp"
#include "fedadm/transitions.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace fedadm {

// Row-stochastic CSR matrix with one reward per row.
struct SparseChain {
    std::vector<std::size_t> row_ptr{0};
    std::vector<StateId> col;
    std::vector<double> val;
    std::vector<double> reward;

    std::size_t size() const { return row_ptr.size() - 1; }
    double row_sum(std::size_t r) const;
};

// Markov chain of the MDP under a fixed policy. Row s is the transition row
// of (s, policy(s)). Throws IncompletePolicyError if a state is unmapped.
SparseChain induced_chain(const Policy& policy, const TransitionModel& model);
SparseChain induced_chain(const ActionTable& actions, const TransitionModel& model);

// Column-major copy: row j of the result lists (i, P[i][j]).
SparseChain transpose(const SparseChain& chain);

// States reachable from `sources` with positive probability.
std::vector<bool> reachable_from(const SparseChain& chain, std::span<const StateId> sources);

// One power-iteration sweep on the lazy chain, out = (in + in * P) / 2, given
// P^T. The lazy chain has the same stationary law and no periodicity; the
// jump chain here is close to period 2 since most jumps move occupancy by one.
// Returns ||out - in||_1.
double stationary_sweep(const SparseChain& transposed, std::span<const double> in, std::span<double> out,
                        Backend backend);

struct StationaryOptions {
    double tolerance = 1e-12;       // L1 change per sweep
    std::size_t max_iterations = 1'000'000;
    double max_residual = 1e-10;    // ||pi P - pi||_1 accepted at the end
    Backend backend = Backend::Parallel;
};

struct StationaryResult {
    std::vector<double> distribution; // over all ids of the chain; zero outside the recurrent class
    std::size_t iterations = 0;
    double residual = 0.0;
    bool direct_solve = false; // power iteration hit its cap and the linear solve ran
};

// Stationary law of the chain restricted to the states reachable from
// `sources`. Falls back to a linear solve (ILUT-preconditioned BiCGSTAB) when
// power iteration hits its cap.
StationaryResult stationary_distribution(const SparseChain& chain, std::span<const StateId> sources,
                                         const StationaryOptions& options = {});

struct AverageProfit {
    double profit_per_demand = 0.0;
    double profit_per_step = 0.0;
    double arrival_fraction = 0.0;
    StationaryResult stationary;
};

// Long-run profit per demand of a policy: expected reward per step divided by
// the stationary share of arrival states.
AverageProfit exact_average_profit(const Policy& policy, const TransitionModel& model,
                                   const StationaryOptions& options = {});
AverageProfit exact_average_profit(const ActionTable& actions, const TransitionModel& model,
                                   const StationaryOptions& options = {});

} // namespace fedadm
