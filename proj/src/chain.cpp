#include "fedadm/chain.hpp"

#include "fedadm/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <deque>
#include <sstream>

namespace fedadm {

double SparseChain::row_sum(std::size_t r) const {
    double sum = 0.0;
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) sum += val[k];
    return sum;
}

SparseChain induced_chain(const ActionTable& actions, const TransitionModel& model) {
    if (actions.size() != model.num_states())
        throw IncompletePolicyError("action table covers " + std::to_string(actions.size()) + " of " +
                                    std::to_string(model.num_states()) + " states");
    SparseChain chain;
    chain.row_ptr.reserve(model.num_states() + 1);
    chain.reward.reserve(model.num_states());
    for (StateId s = 0; s < model.num_states(); ++s) {
        if (!model.legal(s).contains(actions[s]))
            throw InvalidActionError("action " + std::string(to_string(actions[s])) + " is illegal in state " +
                                     to_string(model.space().state(s)));
        const auto row = model.row(s, actions[s]);
        chain.col.insert(chain.col.end(), row.next.begin(), row.next.end());
        chain.val.insert(chain.val.end(), row.probability.begin(), row.probability.end());
        chain.reward.push_back(row.reward);
        chain.row_ptr.push_back(chain.col.size());
    }
    return chain;
}

SparseChain induced_chain(const Policy& policy, const TransitionModel& model) {
    return induced_chain(policy.to_table(model.space()), model);
}

SparseChain transpose(const SparseChain& chain) {
    const std::size_t n = chain.size();
    SparseChain t;
    t.row_ptr.assign(n + 1, 0);
    for (StateId c : chain.col) ++t.row_ptr[c + 1];
    for (std::size_t i = 0; i < n; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
    t.col.resize(chain.col.size());
    t.val.resize(chain.val.size());
    std::vector<std::size_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = chain.row_ptr[r]; k < chain.row_ptr[r + 1]; ++k) {
            const std::size_t dst = cursor[chain.col[k]]++;
            t.col[dst] = static_cast<StateId>(r);
            t.val[dst] = chain.val[k];
        }
    }
    t.reward.assign(n, 0.0);
    return t;
}

std::vector<bool> reachable_from(const SparseChain& chain, std::span<const StateId> sources) {
    std::vector<bool> seen(chain.size(), false);
    std::deque<StateId> queue;
    for (StateId s : sources) {
        if (!seen[s]) {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        const StateId s = queue.front();
        queue.pop_front();
        for (std::size_t k = chain.row_ptr[s]; k < chain.row_ptr[s + 1]; ++k) {
            if (chain.val[k] > 0.0 && !seen[chain.col[k]]) {
                seen[chain.col[k]] = true;
                queue.push_back(chain.col[k]);
            }
        }
    }
    return seen;
}

double stationary_sweep(const SparseChain& transposed, std::span<const double> in, std::span<double> out,
                        Backend backend) {
    const auto n = static_cast<std::ptrdiff_t>(transposed.size());
    double change = 0.0;
    if (backend == Backend::Parallel) {
#pragma omp parallel for schedule(static) reduction(+ : change)
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = transposed.row_ptr[j]; k < transposed.row_ptr[j + 1]; ++k)
                acc += in[transposed.col[k]] * transposed.val[k];
            out[j] = 0.5 * (acc + in[j]);
            change += std::abs(out[j] - in[j]);
        }
    } else {
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = transposed.row_ptr[j]; k < transposed.row_ptr[j + 1]; ++k)
                acc += in[transposed.col[k]] * transposed.val[k];
            out[j] = 0.5 * (acc + in[j]);
            change += std::abs(out[j] - in[j]);
        }
    }
    return change;
}

namespace {

// ||x P - x||_1 computed row-wise on P (independent of the transposed path).
double residual_l1(const SparseChain& chain, const std::vector<double>& x) {
    std::vector<double> y(chain.size(), 0.0);
    for (std::size_t r = 0; r < chain.size(); ++r)
        for (std::size_t k = chain.row_ptr[r]; k < chain.row_ptr[r + 1]; ++k) y[chain.col[k]] += x[r] * chain.val[k];
    double res = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) res += std::abs(y[i] - x[i]);
    return res;
}

std::vector<double> direct_solve(const SparseChain& chain) {
    // Pin x[0] = 1 and solve the other n-1 rows of (P^T - I) x = 0 for the
    // rest; the caller normalizes. State 0 is the lowest reachable id, an
    // empty-system arrival with non-negligible mass. Sparse LU runs out of
    // memory on the largest sweep cells, so this uses preconditioned BiCGSTAB.
    const auto n = static_cast<Eigen::Index>(chain.size());
    if (n == 1) return {1.0};
    const Eigen::Index m = n - 1;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(chain.val.size() + static_cast<std::size_t>(m));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (std::size_t r = 0; r < chain.size(); ++r) {
        for (std::size_t k = chain.row_ptr[r]; k < chain.row_ptr[r + 1]; ++k) {
            const auto row = static_cast<Eigen::Index>(chain.col[k]);
            const auto col = static_cast<Eigen::Index>(r);
            if (row == 0) continue;
            if (col == 0)
                rhs(row - 1) -= chain.val[k];
            else
                triplets.emplace_back(row - 1, col - 1, chain.val[k]);
        }
    }
    for (Eigen::Index i = 0; i < m; ++i) triplets.emplace_back(i, i, -1.0);
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
    solver.preconditioner().setDroptol(1e-6);
    solver.preconditioner().setFillfactor(20);
    solver.setTolerance(1e-14);
    solver.setMaxIterations(100'000);
    solver.compute(a);
    if (solver.info() != Eigen::Success) throw NumericalError("preconditioner setup for the stationary system failed");
    const Eigen::VectorXd x = solver.solve(rhs);
    if (solver.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "iterative stationary solve stopped after " << solver.iterations() << " iterations (error "
            << solver.error() << ")";
        throw NumericalError(msg.str());
    }
    std::vector<double> out{1.0};
    out.insert(out.end(), x.data(), x.data() + m);
    return out;
}

} // namespace

StationaryResult stationary_distribution(const SparseChain& chain, std::span<const StateId> sources,
                                         const StationaryOptions& options) {
    const std::vector<bool> forward = reachable_from(chain, sources);

    // Every reachable state must lead back to the sources, otherwise the
    // reachable set holds more than one recurrent class.
    const SparseChain t = transpose(chain);
    const std::vector<bool> backward = reachable_from(t, sources);
    std::vector<StateId> members;
    std::vector<StateId> local_id(chain.size(), 0);
    for (StateId s = 0; s < chain.size(); ++s) {
        if (!forward[s]) continue;
        if (!backward[s])
            throw NumericalError("induced chain is not unichain: state " + std::to_string(s) +
                                 " is reachable but cannot return to the empty system");
        local_id[s] = static_cast<StateId>(members.size());
        members.push_back(s);
    }

    SparseChain sub;
    sub.row_ptr.reserve(members.size() + 1);
    for (StateId s : members) {
        for (std::size_t k = chain.row_ptr[s]; k < chain.row_ptr[s + 1]; ++k) {
            if (chain.val[k] <= 0.0) continue;
            sub.col.push_back(local_id[chain.col[k]]);
            sub.val.push_back(chain.val[k]);
        }
        sub.row_ptr.push_back(sub.col.size());
        sub.reward.push_back(chain.reward[s]);
    }
    const SparseChain sub_t = transpose(sub);

    StationaryResult result;
    const std::size_t m = members.size();
    std::vector<double> x(m, 1.0 / static_cast<double>(m));
    std::vector<double> y(m, 0.0);
    bool converged = false;
    while (result.iterations < options.max_iterations) {
        const double change = stationary_sweep(sub_t, x, y, options.backend);
        ++result.iterations;
        x.swap(y);
        if (change <= options.tolerance) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        x = direct_solve(sub);
        result.direct_solve = true;
    }
    double total = 0.0;
    for (double v : x) total += v;
    for (double& v : x) v /= total;
    result.residual = residual_l1(sub, x);
    if (!(result.residual <= options.max_residual)) {
        std::ostringstream msg;
        msg << "stationary solve did not converge: residual " << result.residual << " after " << result.iterations
            << " sweeps" << (result.direct_solve ? " and a direct solve" : "");
        throw NumericalError(msg.str());
    }
    result.distribution.assign(chain.size(), 0.0);
    for (std::size_t i = 0; i < m; ++i) result.distribution[members[i]] = x[i];
    return result;
}

AverageProfit exact_average_profit(const ActionTable& actions, const TransitionModel& model,
                                   const StationaryOptions& options) {
    const SparseChain chain = induced_chain(actions, model);
    AverageProfit out;
    out.stationary = stationary_distribution(chain, model.space().empty_arrival_states(), options);
    const auto& pi = out.stationary.distribution;
    for (StateId s = 0; s < chain.size(); ++s) {
        out.profit_per_step += pi[s] * chain.reward[s];
        if (model.space().state(s).is_arrival()) out.arrival_fraction += pi[s];
    }
    out.profit_per_demand = out.profit_per_step / out.arrival_fraction;
    return out;
}

AverageProfit exact_average_profit(const Policy& policy, const TransitionModel& model,
                                   const StationaryOptions& options) {
    return exact_average_profit(policy.to_table(model.space()), model, options);
}

} // namespace fedadm
