#include "fedadm/harness.hpp"

#include "fedadm/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

namespace fedadm {

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::Episodes: return "episodes";
    case ExperimentKind::LocalCapacity: return "local_capacity";
    case ExperimentKind::OfferedLoad: return "offered_load";
    case ExperimentKind::FederationCost: return "federation_cost";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
    for (auto k : {ExperimentKind::Episodes, ExperimentKind::LocalCapacity, ExperimentKind::OfferedLoad,
                   ExperimentKind::FederationCost})
        if (name == to_string(k)) return k;
    throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

std::string AlgorithmSpec::label() const {
    switch (kind) {
    case AlgorithmKind::Dp: return "dp";
    case AlgorithmKind::Greedy: return "greedy";
    case AlgorithmKind::RLearning: return "RL";
    case AlgorithmKind::QLearning: {
        std::ostringstream os;
        os << "QL-" << gamma;
        return os.str();
    }
    }
    return "unknown";
}

AlgorithmSpec algorithm_from_string(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "dp") return {AlgorithmKind::Dp};
    if (lower == "greedy") return {AlgorithmKind::Greedy};
    if (lower == "rl") return {AlgorithmKind::RLearning};
    if (lower.rfind("ql-", 0) == 0) {
        try {
            std::size_t used = 0;
            const double gamma = std::stod(lower.substr(3), &used);
            if (used == lower.size() - 3 && gamma >= 0.0 && gamma < 1.0) return {AlgorithmKind::QLearning, gamma};
        } catch (const std::exception&) {
        }
    }
    throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected dp, greedy, RL or QL-<gamma>)");
}

void ExperimentSpec::validate() const {
    if (sweep_values.empty()) throw ConfigError("sweep needs at least one value");
    for (std::size_t i = 1; i < sweep_values.size(); ++i)
        if (!(sweep_values[i] > sweep_values[i - 1])) throw ConfigError("sweep values must be strictly increasing");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (algorithms.empty()) throw ConfigError("sweep needs at least one algorithm");
    if (eval_demands < 1) throw ConfigError("eval_demands must be >= 1");
    for (double v : sweep_values) cell_config(*this, v).validate();
    if (kind == ExperimentKind::Episodes)
        for (double v : sweep_values)
            if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
                throw ConfigError("episode counts must be positive integers");
    learning.validate();
    dp.validate();
}

std::vector<double> default_sweep_values(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::Episodes: return {10, 25, 50, 100, 150, 200};
    case ExperimentKind::LocalCapacity: return {10, 20, 30, 45, 60, 90, 120};
    case ExperimentKind::OfferedLoad: return {0.25, 0.5, 1, 1.5, 2};
    case ExperimentKind::FederationCost: return {0, 0.5, 1, 1.5, 2, 3};
    }
    return {};
}

ExperimentSpec default_experiment(ExperimentKind kind, const SystemConfig& base) {
    ExperimentSpec spec;
    spec.kind = kind;
    spec.sweep_values = default_sweep_values(kind);
    spec.algorithms = {{AlgorithmKind::Dp},
                       {AlgorithmKind::Greedy},
                       {AlgorithmKind::QLearning, 0.5},
                       {AlgorithmKind::QLearning, 0.9},
                       {AlgorithmKind::RLearning}};
    spec.base_config = base;
    return spec;
}

SystemConfig cell_config(const ExperimentSpec& spec, double sweep_value) {
    SystemConfig c = spec.base_config;
    switch (spec.kind) {
    case ExperimentKind::Episodes: break;
    case ExperimentKind::LocalCapacity: c.local_capacity = static_cast<int>(sweep_value); break;
    case ExperimentKind::OfferedLoad: c.load_scale = sweep_value; break;
    case ExperimentKind::FederationCost: c.cost_scale = sweep_value; break;
    }
    return c;
}

namespace {

struct CellOutcome {
    bool done = false;
    double profit = 0.0;
    DecisionCounts counts;
};

struct ValueContext {
    SystemConfig config;
    Policy dp_policy;
    bool solved = false;
    std::vector<std::uint64_t> eval_seeds;
};

std::uint64_t cell_seed(const ExperimentSpec& spec, double value, std::string_view label, std::size_t rep) {
    return derive_seed({spec.seed_base, label_id(to_string(spec.kind)), value_id(value), label_id(label), rep});
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace

SweepResult run_sweep(const ExperimentSpec& spec, const SweepOptions& options) {
    spec.validate();
    const std::size_t nv = spec.sweep_values.size();
    const std::size_t na = spec.algorithms.size();
    const std::size_t nr = spec.repetitions;
    const int jobs = std::max(1, options.jobs);

    std::vector<ValueContext> contexts(nv);
    std::vector<std::string> failures;

    auto fail = [&](const std::string& what) {
#pragma omp critical(fedadm_sweep_fail)
        failures.push_back(what);
    };
    auto progress = [&](const std::string& line) {
        if (!options.progress) return;
#pragma omp critical(fedadm_sweep_progress)
        *options.progress << line << std::endl;
    };

    // Phase 1: one DP solve per sweep value. The episodes sweep shares one config.
    const std::size_t distinct = spec.kind == ExperimentKind::Episodes ? 1 : nv;
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (std::ptrdiff_t vi = 0; vi < static_cast<std::ptrdiff_t>(distinct); ++vi) {
        const double value = spec.sweep_values[vi];
        try {
            auto& ctx = contexts[vi];
            ctx.config = cell_config(spec, value);
            const auto space = StateSpace::enumerate(ctx.config);
            const TransitionModel model(space);
            const auto solved = policy_iteration(spec.dp, model);
            ctx.dp_policy = Policy::from_table(space, solved.actions);
            ctx.solved = true;
            progress(std::string(to_string(spec.kind)) + " " + fmt(value) + ": dp solved in " +
                     std::to_string(solved.iterations) + " rounds");
        } catch (const std::exception& e) {
            fail("cell (" + std::string(to_string(spec.kind)) + ", " + fmt(value) + ", dp solve): " + e.what());
        }
    }
    for (std::size_t vi = 0; vi < nv; ++vi) {
        if (distinct == 1 && vi > 0) {
            contexts[vi].config = contexts[0].config;
            contexts[vi].dp_policy = contexts[0].dp_policy;
            contexts[vi].solved = contexts[0].solved;
        }
        const double value = spec.sweep_values[vi];
        for (std::size_t k = 0; k < nr; ++k) contexts[vi].eval_seeds.push_back(cell_seed(spec, value, "eval", k));
    }

    // Phase 2: every (value, algorithm, repetition) cell, plus the DP
    // reference on each evaluation seed.
    const std::size_t per_value = (na + 1) * nr;
    std::vector<CellOutcome> outcomes(nv * per_value);
    auto slot = [&](std::size_t vi, std::size_t ai, std::size_t k) { return vi * per_value + ai * nr + k; };
    const std::size_t reference_ai = na;

#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(nv * per_value); ++t) {
        const std::size_t vi = static_cast<std::size_t>(t) / per_value;
        const std::size_t ai = (static_cast<std::size_t>(t) % per_value) / nr;
        const std::size_t k = static_cast<std::size_t>(t) % nr;
        const auto& ctx = contexts[vi];
        const double value = spec.sweep_values[vi];
        const std::string label = ai == reference_ai ? "dp-reference" : spec.algorithms[ai].label();
        if (!ctx.solved) continue;
        try {
            Policy trained;
            const Policy* policy = &ctx.dp_policy;
            const AlgorithmKind kind = ai == reference_ai ? AlgorithmKind::Dp : spec.algorithms[ai].kind;
            if (kind == AlgorithmKind::Dp && ai != reference_ai) {
                // Identical to the reference run; filled in below.
                continue;
            }
            if (kind == AlgorithmKind::Greedy) {
                trained = greedy_policy(StateSpace::enumerate(ctx.config));
                policy = &trained;
            } else if (kind == AlgorithmKind::QLearning || kind == AlgorithmKind::RLearning) {
                LearningParams lp = spec.learning;
                lp.seed = cell_seed(spec, value, label, k);
                if (spec.kind == ExperimentKind::Episodes) lp.episodes = static_cast<std::size_t>(value);
                if (kind == AlgorithmKind::QLearning) {
                    lp.gamma = spec.algorithms[ai].gamma;
                    trained = q_learning_train(ctx.config, lp).policy;
                } else {
                    trained = r_learning_train(ctx.config, lp).policy;
                }
                policy = &trained;
            }
            const RunResult run = run_policy(*policy, ctx.config, spec.eval_demands, ctx.eval_seeds[k]);
            auto& out = outcomes[slot(vi, ai, k)];
            out.profit = run.profit_per_demand;
            out.counts = run.counts;
            out.done = true;
            progress(std::string(to_string(spec.kind)) + " " + fmt(value) + " " + label + " #" + std::to_string(k) +
                     ": " + fmt(run.profit_per_demand));
        } catch (const std::exception& e) {
            fail("cell (" + std::string(to_string(spec.kind)) + ", " + fmt(value) + ", " + label + ", seed " +
                 std::to_string(k) + "): " + e.what());
        }
    }

    SweepResult result;
    for (std::size_t vi = 0; vi < nv; ++vi) {
        const double value = spec.sweep_values[vi];
        for (std::size_t ai = 0; ai < na; ++ai) {
            const bool is_dp = spec.algorithms[ai].kind == AlgorithmKind::Dp;
            std::vector<ResultRow> seed_rows;
            for (std::size_t k = 0; k < nr; ++k) {
                const auto& ref = outcomes[slot(vi, reference_ai, k)];
                const auto& cell = is_dp ? ref : outcomes[slot(vi, ai, k)];
                if (!cell.done || !ref.done) continue;
                ResultRow row;
                row.experiment = std::string(to_string(spec.kind));
                row.sweep = value;
                row.algorithm = spec.algorithms[ai].label();
                row.seed = k;
                row.avg_profit = cell.profit;
                try {
                    row.gap = is_dp ? 0.0 : optimality_gap(ref.profit, cell.profit);
                } catch (const GapUndefinedError& e) {
                    fail("cell (" + row.experiment + ", " + fmt(value) + ", " + row.algorithm + ", seed " +
                         std::to_string(k) + "): " + e.what());
                    continue;
                }
                row.accepted = static_cast<double>(cell.counts.total_accepted());
                row.federated = static_cast<double>(cell.counts.total_federated());
                row.rejected = static_cast<double>(cell.counts.total_rejected());
                seed_rows.push_back(row);
            }
            if (seed_rows.empty()) continue;
            result.rows.insert(result.rows.end(), seed_rows.begin(), seed_rows.end());
            if (seed_rows.size() != nr) continue;
            ResultRow mean = seed_rows.front();
            mean.seed.reset();
            mean.avg_profit = mean.gap = mean.accepted = mean.federated = mean.rejected = 0.0;
            for (const auto& r : seed_rows) {
                mean.avg_profit += r.avg_profit;
                mean.gap += r.gap;
                mean.accepted += r.accepted;
                mean.federated += r.federated;
                mean.rejected += r.rejected;
            }
            const auto n = static_cast<double>(seed_rows.size());
            mean.avg_profit /= n;
            mean.gap /= n;
            mean.accepted /= n;
            mean.federated /= n;
            mean.rejected /= n;
            result.rows.push_back(mean);
        }
    }
    if (!failures.empty()) {
        std::sort(failures.begin(), failures.end());
        result.failure = failures.front();
    }
    return result;
}

std::string format_row(const ResultRow& row) {
    std::ostringstream os;
    os << row.experiment << ',' << fmt(row.sweep) << ',' << row.algorithm << ','
       << (row.seed ? std::to_string(*row.seed) : std::string("mean")) << ',' << fmt(row.avg_profit) << ','
       << fmt(row.gap) << ',' << fmt(row.accepted) << ',' << fmt(row.federated) << ',' << fmt(row.rejected);
    return os.str();
}

void write_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << kCsvHeader << '\n';
    for (const auto& row : rows) out << format_row(row) << '\n';
}

std::vector<ResultRow> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw ConfigError(path.string() + ": expected header '" + std::string(kCsvHeader) + "'");
    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 9)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 9 fields");
        try {
            ResultRow row;
            row.experiment = fields[0];
            row.sweep = std::stod(fields[1]);
            row.algorithm = fields[2];
            if (fields[3] != "mean") row.seed = std::stoull(fields[3]);
            row.avg_profit = std::stod(fields[4]);
            row.gap = std::stod(fields[5]);
            row.accepted = std::stod(fields[6]);
            row.federated = std::stod(fields[7]);
            row.rejected = std::stod(fields[8]);
            rows.push_back(row);
        } catch (const std::exception&) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": unparseable numeric field");
        }
    }
    return rows;
}

std::string report_table(const std::vector<ResultRow>& rows) {
    struct Group {
        std::string experiment;
        double sweep;
        std::string algorithm;
        std::vector<double> profit;
        std::vector<double> gap;
    };
    std::vector<Group> groups;
    std::map<std::tuple<std::string, double, std::string>, std::size_t> index;
    for (const auto& r : rows) {
        if (r.is_mean()) continue;
        const auto key = std::make_tuple(r.experiment, r.sweep, r.algorithm);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, groups.size()).first;
            groups.push_back(Group{r.experiment, r.sweep, r.algorithm, {}, {}});
        }
        groups[it->second].profit.push_back(r.avg_profit);
        groups[it->second].gap.push_back(r.gap);
    }
    std::ostringstream os;
    os << std::left << std::setw(16) << "experiment" << std::right << std::setw(10) << "sweep" << "  " << std::left
       << std::setw(10) << "algorithm" << std::right << std::setw(6) << "runs" << std::setw(14) << "avg_profit"
       << std::setw(10) << "+/-95%" << std::setw(10) << "gap_%" << '\n';
    for (const auto& g : groups) {
        const double n = static_cast<double>(g.profit.size());
        const double profit = std::accumulate(g.profit.begin(), g.profit.end(), 0.0) / n;
        const double gap = std::accumulate(g.gap.begin(), g.gap.end(), 0.0) / n;
        os << std::left << std::setw(16) << g.experiment << std::right << std::setw(10) << fmt_short(g.sweep) << "  "
           << std::left << std::setw(10) << g.algorithm << std::right << std::setw(6) << g.profit.size() << std::fixed
           << std::setprecision(3) << std::setw(14) << profit << std::setw(10) << confidence_half_width(g.profit)
           << std::setprecision(2) << std::setw(10) << 100.0 * gap << '\n';
        os.unsetf(std::ios::floatfield);
    }
    return os.str();
}

} // namespace fedadm
