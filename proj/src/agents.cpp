#include "fedadm/agents.hpp"

#include "fedadm/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <numeric>

namespace fedadm {

Action greedy_action(const State& s, const SystemConfig& config) {
    if (s.is_departure()) return Action::NoAction;
    const ActionSet legal = valid_actions(s, config);
    if (legal.contains(Action::Accept)) return Action::Accept;
    if (legal.contains(Action::Federate)) return Action::Federate;
    return Action::Reject;
}

Policy greedy_policy(const StateSpace& space) {
    Policy p;
    p.reserve(space.size());
    for (StateId id = 0; id < space.size(); ++id) p.set(space.key(id), greedy_action(space.state(id), space.config()));
    return p;
}

double QTable::Entry::max_value() const {
    double best = 0.0;
    bool first = true;
    for (Action a : kActionPriority) {
        if (!legal.contains(a)) continue;
        const double v = value[static_cast<std::size_t>(a)];
        if (first || v > best) best = v;
        first = false;
    }
    return best;
}

Action QTable::Entry::best_action() const {
    Action best = Action::NoAction;
    double best_value = 0.0;
    bool first = true;
    for (Action a : kActionPriority) {
        if (!legal.contains(a)) continue;
        const double v = value[static_cast<std::size_t>(a)];
        if (first || v > best_value) {
            best = a;
            best_value = v;
            first = false;
        }
    }
    return best;
}

QTable::Entry& QTable::touch(StateKey key, ActionSet legal) {
    auto [it, inserted] = entries_.try_emplace(key);
    if (inserted) it->second.legal = legal;
    return it->second;
}

const QTable::Entry* QTable::find(StateKey key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

double QTable::max_value(StateKey key) const {
    const Entry* e = find(key);
    return e ? e->max_value() : 0.0;
}

Policy QTable::readout() const {
    Policy p;
    p.reserve(entries_.size());
    for (const auto& [key, entry] : entries_) p.set(key, entry.best_action());
    return p;
}

bool QTable::all_finite() const {
    for (const auto& [key, entry] : entries_)
        for (Action a : entry.legal.members())
            if (!std::isfinite(entry.value[static_cast<std::size_t>(a)])) return false;
    return true;
}

Action epsilon_greedy(const QTable& table, StateKey key, ActionSet legal, double epsilon, Rng& rng) {
    if (rng.uniform() < epsilon) {
        const auto members = legal.members();
        return members[rng.index(members.size())];
    }
    if (const auto* entry = table.find(key)) return entry->best_action();
    // Unseen state: every value reads zero, so the tie order decides.
    for (Action a : kActionPriority)
        if (legal.contains(a)) return a;
    return Action::NoAction;
}

void q_update(QTable::Entry& entry, Action a, double reward, double next_max, double alpha, double gamma) {
    double& q = entry.value[static_cast<std::size_t>(a)];
    q = (1.0 - alpha) * q + alpha * (reward + gamma * next_max);
}

bool r_update(QTable::Entry& entry, Action a, double reward, double next_max, double alpha, double beta,
              double& rho) {
    double& q = entry.value[static_cast<std::size_t>(a)];
    q = (1.0 - alpha) * q + alpha * ((reward - rho) + next_max);
    const double state_max = entry.max_value();
    if (q != state_max) return false;
    rho = (1.0 - beta) * rho + beta * (reward - state_max + next_max);
    return true;
}

void LearningParams::validate() const {
    if (episodes == 0 || steps_per_episode == 0) throw ConfigError("episodes and steps must be >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must be in [0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0, 1)");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must be in (0, 1]");
    if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must be in (0, 1]");
}

EnvFactory default_env_factory(const SystemConfig& config, std::uint64_t seed) {
    return [config, seed](std::size_t episode) {
        Environment env(config);
        env.reset(derive_seed({seed, label_id("episode"), episode}));
        return env;
    };
}

namespace {

enum class Algorithm { QLearning, RLearning };

TrainingResult train(Algorithm algo, const SystemConfig& config, const LearningParams& params,
                     const EnvFactory& factory_in) {
    config.validate();
    params.validate();
    const EnvFactory factory = factory_in ? factory_in : default_env_factory(config, params.seed);
    Rng agent_rng(derive_seed({params.seed, label_id("agent")}));
    const auto curve_seeds = evaluation_seeds(derive_seed({params.seed, label_id("curve")}), params.curve_seeds);

    TrainingResult result;
    double alpha = params.alpha;
    double epsilon = params.epsilon;
    double beta = params.beta;
    double rho = 0.0;

    for (std::size_t episode = 0; episode < params.episodes; ++episode) {
        alpha *= params.decay;
        epsilon *= params.decay;
        if (algo == Algorithm::RLearning) beta *= params.decay;

        Environment env = factory(episode);
        std::size_t count = 0;
        while (count < params.steps_per_episode) {
            const State& s = env.current();
            const StateKey key = env.current_key();
            const ActionSet legal = valid_actions(s, config);
            const Action a = s.is_departure() ? Action::NoAction
                                              : epsilon_greedy(result.table, key, legal, epsilon, agent_rng);
            if (params.episode_unit == EpisodeUnit::Steps || s.is_arrival()) ++count;

            QTable::Entry& entry = result.table.touch(key, legal);
            const auto step = env.step(a);
            const double next_max = result.table.max_value(env.current_key());
            if (algo == Algorithm::QLearning)
                q_update(entry, a, step.reward, next_max, alpha, params.gamma);
            else
                r_update(entry, a, step.reward, next_max, alpha, beta, rho);
        }
        result.total_steps += env.steps_taken();
        if (algo == Algorithm::RLearning) result.rho_series.push_back(rho);
        if (params.record_curve)
            result.curve.push_back(
                evaluate_policy(result.table.readout(), config, params.curve_demands, curve_seeds, Backend::Serial));
    }
    result.policy = result.table.readout();
    result.final_alpha = alpha;
    result.final_epsilon = epsilon;
    result.final_beta = beta;
    return result;
}

} // namespace

TrainingResult q_learning_train(const SystemConfig& config, const LearningParams& params, const EnvFactory& factory) {
    return train(Algorithm::QLearning, config, params, factory);
}

TrainingResult r_learning_train(const SystemConfig& config, const LearningParams& params, const EnvFactory& factory) {
    return train(Algorithm::RLearning, config, params, factory);
}

double optimality_gap(double ap_reference, double ap) {
    if (!(ap_reference > 0.0))
        throw GapUndefinedError("optimality gap needs a positive reference profit, got " + std::to_string(ap_reference));
    return (ap_reference - ap) / ap_reference;
}

double confidence_half_width(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 2) return 0.0;
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    const boost::math::students_t dist(static_cast<double>(n - 1));
    return boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(n));
}

EvalReport evaluate_policy(const Policy& policy, const SystemConfig& config, std::uint64_t num_demands,
                           const std::vector<std::uint64_t>& seeds, Backend backend) {
    const auto n = static_cast<std::ptrdiff_t>(seeds.size());
    std::vector<RunResult> runs(seeds.size());
    if (backend == Backend::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < n; ++i) runs[i] = run_policy(policy, config, num_demands, seeds[i]);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) runs[i] = run_policy(policy, config, num_demands, seeds[i]);
    }
    EvalReport report;
    report.seeds = seeds;
    report.num_demands = num_demands;
    report.counts = DecisionCounts(config.num_classes());
    for (const auto& run : runs) {
        report.per_seed_profit.push_back(run.profit_per_demand);
        report.fallbacks += run.fallbacks;
        report.counts.add(run.counts);
    }
    if (!runs.empty())
        report.average_profit = std::accumulate(report.per_seed_profit.begin(), report.per_seed_profit.end(), 0.0) /
                                static_cast<double>(runs.size());
    report.half_width = confidence_half_width(report.per_seed_profit);
    return report;
}

void attach_gap(EvalReport& report, double reference_profit) {
    report.optimality_gap = optimality_gap(reference_profit, report.average_profit);
}

std::vector<std::uint64_t> evaluation_seeds(std::uint64_t base, std::size_t count) {
    std::vector<std::uint64_t> seeds;
    seeds.reserve(count);
    for (std::size_t k = 0; k < count; ++k) seeds.push_back(derive_seed({base, label_id("eval"), k}));
    return seeds;
}

} // namespace fedadm
