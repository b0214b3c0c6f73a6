#include "fedadm/cli.hpp"

#include "fedadm/agents.hpp"
#include "fedadm/chain.hpp"
#include "fedadm/config_io.hpp"
#include "fedadm/dp.hpp"
#include "fedadm/errors.hpp"
#include "fedadm/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

namespace fedadm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

SystemConfig config_or_default(const std::string& path) {
    return path.empty() ? default_config() : load_config(path);
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

void print_counts(std::ostream& out, const DecisionCounts& counts) {
    for (std::size_t i = 0; i < counts.accepted.size(); ++i)
        out << "  class " << i + 1 << ": accepted " << counts.accepted[i] << ", federated " << counts.federated[i]
            << ", rejected " << counts.rejected[i] << '\n';
}

struct ValidateArgs {
    std::string config;
};

int run_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
    const SystemConfig config = config_or_default(args.config);
    const auto space = StateSpace::enumerate(config);
    const TransitionModel model(space);
    double min_dev = std::numeric_limits<double>::infinity();
    double max_dev = 0.0;
    std::size_t rows = 0;
    std::size_t bad_successors = 0;
    for (StateId s = 0; s < space.size(); ++s) {
        for (Action a : model.legal(s).members()) {
            const auto row = model.row(s, a);
            double sum = 0.0;
            for (std::size_t k = 0; k < row.next.size(); ++k) {
                sum += row.probability[k];
                if (!is_valid_state(space.state(row.next[k]), config) || !(row.probability[k] > 0.0)) ++bad_successors;
            }
            const double dev = std::abs(sum - 1.0);
            min_dev = std::min(min_dev, dev);
            max_dev = std::max(max_dev, dev);
            ++rows;
        }
    }
    out << "config " << config_hash(config) << '\n';
    out << "states: " << space.size() << '\n';
    out << "rows: " << rows << ", entries: " << model.num_entries() << '\n';
    out << "row-sum deviation: min " << min_dev << ", max " << max_dev << '\n';
    bool ok = true;
    if (max_dev > 1e-9) {
        err << "row sums deviate from 1 by up to " << max_dev << '\n';
        ok = false;
    } else {
        out << "all row sums within 1e-9\n";
    }
    if (bad_successors > 0) {
        err << bad_successors << " successor entries violate state invariants\n";
        ok = false;
    } else {
        out << "all successors satisfy state invariants\n";
    }
    return ok ? kExitOk : kExitInvariant;
}

struct SolveArgs {
    std::string config;
    double gamma = 0.99;
    double theta = 1e-6;
    std::string clock = "per_demand";
    std::size_t power_cap = 1'000'000;
    std::string out;
    std::string report;
};

int run_solve(const SolveArgs& args, std::ostream& out) {
    const SystemConfig config = config_or_default(args.config);
    DpParams params;
    params.discount = args.gamma;
    params.tolerance = args.theta;
    params.clock = discount_clock_from_string(args.clock);
    params.validate();
    const auto start = Clock::now();
    const auto space = StateSpace::enumerate(config);
    const TransitionModel model(space);
    const auto solved = policy_iteration(params, model);
    const double solve_seconds = seconds_since(start);
    StationaryOptions stationary;
    stationary.max_iterations = args.power_cap;
    const auto exact = exact_average_profit(solved.actions, model, stationary);

    const Policy policy = Policy::from_table(space, solved.actions);
    save_policy(args.out, policy, space, "dp");
    std::filesystem::path report_path = args.report;
    if (report_path.empty()) report_path = std::filesystem::path(args.out).replace_extension(".report.json");
    nlohmann::json report = {
        {"config_hash", config_hash(config)},
        {"states", space.size()},
        {"gamma", params.discount},
        {"theta", params.tolerance},
        {"discount_clock", std::string(to_string(params.clock))},
        {"iterations", solved.iterations},
        {"total_sweeps", solved.total_sweeps},
        {"final_delta", solved.final_delta},
        {"exact_average_profit", exact.profit_per_demand},
        {"profit_per_step", exact.profit_per_step},
        {"stationary_iterations", exact.stationary.iterations},
        {"stationary_residual", exact.stationary.residual},
        {"stationary_linear_solve", exact.stationary.direct_solve},
        {"solve_seconds", solve_seconds},
    };
    open_output(report_path) << report.dump(2) << '\n';

    out << "states: " << space.size() << '\n';
    out << "policy iteration: " << solved.iterations << " rounds, " << solved.total_sweeps
        << " evaluation sweeps, final delta " << solved.final_delta << '\n';
    out << "exact average profit per demand: " << std::setprecision(10) << exact.profit_per_demand << '\n';
    out << "wrote " << args.out << " and " << report_path.string() << '\n';
    return kExitOk;
}

struct TrainArgs {
    std::string algo;
    std::string config;
    LearningParams params;
    std::string episode_unit = "steps";
    std::string out;
    std::string curve;
};

int run_train(TrainArgs args, std::ostream& out) {
    const SystemConfig config = config_or_default(args.config);
    if (args.episode_unit == "demands")
        args.params.episode_unit = EpisodeUnit::Demands;
    else if (args.episode_unit != "steps")
        throw ConfigError("--episode-unit must be steps or demands");
    args.params.record_curve = !args.curve.empty();
    const bool r_learning = args.algo == "r";
    const auto start = Clock::now();
    const TrainingResult result =
        r_learning ? r_learning_train(config, args.params) : q_learning_train(config, args.params);
    if (!result.table.all_finite()) throw NumericalError("training produced non-finite Q values");
    const auto space = StateSpace::enumerate(config);
    save_policy(args.out, result.policy, space, args.algo);
    if (!args.curve.empty()) {
        auto csv = open_output(args.curve);
        csv << "episode,avg_profit,half_width,fallbacks" << (r_learning ? ",rho" : "") << '\n';
        csv << std::setprecision(17);
        for (std::size_t e = 0; e < result.curve.size(); ++e) {
            csv << e + 1 << ',' << result.curve[e].average_profit << ',' << result.curve[e].half_width << ','
                << result.curve[e].fallbacks;
            if (r_learning) csv << ',' << result.rho_series[e];
            csv << '\n';
        }
    }
    out << (r_learning ? "R-Learning" : "Q-Learning") << ": " << args.params.episodes << " episodes, "
        << result.total_steps << " steps in " << std::setprecision(3) << seconds_since(start) << " s\n";
    out << "visited states: " << result.table.size() << " of " << space.size() << '\n';
    out << std::setprecision(6) << "final alpha " << result.final_alpha << ", epsilon " << result.final_epsilon;
    if (r_learning) out << ", beta " << result.final_beta << ", rho " << result.rho_series.back();
    out << '\n' << "wrote " << args.out << '\n';
    return kExitOk;
}

struct EvaluateArgs {
    std::string policy;
    std::string config;
    std::uint64_t demands = 100'000;
    std::size_t seeds = 10;
    std::uint64_t seed = 0;
    std::string reference;
    std::string trace;
};

int run_evaluate(const EvaluateArgs& args, std::ostream& out) {
    const SystemConfig config = config_or_default(args.config);
    const auto space = StateSpace::enumerate(config);
    const PolicyFile file = load_policy(args.policy, space);
    const auto seeds = evaluation_seeds(args.seed, args.seeds);
    EvalReport report = evaluate_policy(file.policy, config, args.demands, seeds);
    if (!args.reference.empty()) {
        const PolicyFile ref = load_policy(args.reference, space);
        attach_gap(report, evaluate_policy(ref.policy, config, args.demands, seeds).average_profit);
    }
    if (!args.trace.empty()) {
        auto trace = open_output(args.trace);
        RunOptions options;
        options.trace = &trace;
        run_policy(file.policy, config, args.demands, seeds.front(), options);
    }
    out << "policy " << args.policy << " (" << file.source << "), " << args.seeds << " seeds x " << args.demands
        << " demands\n";
    out << std::setprecision(10) << "average profit per demand: " << report.average_profit << " +/- "
        << report.half_width << " (95%)\n";
    if (report.optimality_gap) out << "optimality gap vs reference: " << *report.optimality_gap * 100.0 << " %\n";
    out << "greedy fallbacks: " << report.fallbacks << '\n';
    print_counts(out, report.counts);
    return kExitOk;
}

struct SweepArgs {
    std::string kind;
    std::string config;
    std::string out;
    int jobs = 1;
    std::uint64_t seed = 0;
    std::size_t repetitions = 10;
    std::uint64_t demands = 100'000;
    std::vector<double> values;
    std::vector<std::string> algorithms;
    double dp_gamma = 0.99;
    std::string clock = "per_demand";
    std::string episode_unit = "steps";
    std::string trace;
};

int run_sweep_command(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    const SystemConfig config = config_or_default(args.config);
    ExperimentSpec spec = default_experiment(experiment_kind_from_string(args.kind), config);
    if (!args.values.empty()) spec.sweep_values = args.values;
    if (!args.algorithms.empty()) {
        spec.algorithms.clear();
        for (const auto& name : args.algorithms) spec.algorithms.push_back(algorithm_from_string(name));
    }
    spec.repetitions = args.repetitions;
    spec.eval_demands = args.demands;
    spec.seed_base = args.seed;
    spec.dp.discount = args.dp_gamma;
    spec.dp.clock = discount_clock_from_string(args.clock);
    if (args.episode_unit == "demands")
        spec.learning.episode_unit = EpisodeUnit::Demands;
    else if (args.episode_unit != "steps")
        throw ConfigError("--episode-unit must be steps or demands");
    spec.validate();

    std::ofstream trace;
    SweepOptions options;
    options.jobs = args.jobs;
    if (!args.trace.empty()) {
        trace = open_output(args.trace);
        options.progress = &trace;
    }
    const auto start = Clock::now();
    const SweepResult result = run_sweep(spec, options);
    write_csv(args.out, result.rows);
    out << "wrote " << result.rows.size() << " rows to " << args.out << " in " << std::setprecision(3)
        << seconds_since(start) << " s\n";
    if (result.failure) {
        err << "sweep failed: " << *result.failure << " (partial results written)\n";
        return kExitInvariant;
    }
    out << report_table(result.rows);
    return kExitOk;
}

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Admission control for federated service domains: exact DP, learners and sweeps", "fedadm"};
    app.require_subcommand(1);

    ValidateArgs validate;
    auto* validate_cmd = app.add_subcommand("validate", "Enumerate the state space and check every transition row");
    validate_cmd->add_option("--config", validate.config, "System config JSON (default: built-in defaults)");

    SolveArgs solve;
    auto* solve_cmd = app.add_subcommand("solve", "Policy iteration; writes the policy and a sidecar report");
    solve_cmd->add_option("--config", solve.config, "System config JSON");
    solve_cmd->add_option("--gamma", solve.gamma, "Discount factor")->capture_default_str();
    solve_cmd->add_option("--theta", solve.theta, "Evaluation tolerance")->capture_default_str();
    solve_cmd->add_option("--discount-clock", solve.clock, "per_demand or per_transition")
        ->check(CLI::IsMember({"per_demand", "per_transition"}))
        ->capture_default_str();
    solve_cmd->add_option("--max-power-sweeps", solve.power_cap,
                          "Power-iteration cap before the linear-solve fallback")
        ->capture_default_str();
    solve_cmd->add_option("--out", solve.out, "Policy file")->required();
    solve_cmd->add_option("--report", solve.report, "Sidecar report (default: <out>.report.json)");

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train Q-Learning or R-Learning and write the greedy readout");
    train_cmd->add_option("--algo", train.algo, "q or r")->required()->check(CLI::IsMember({"q", "r"}));
    train_cmd->add_option("--config", train.config, "System config JSON");
    train_cmd->add_option("--episodes", train.params.episodes)->capture_default_str();
    train_cmd->add_option("--steps", train.params.steps_per_episode, "Steps (or demands) per episode")
        ->capture_default_str();
    train_cmd->add_option("--alpha", train.params.alpha)->capture_default_str();
    train_cmd->add_option("--beta", train.params.beta)->capture_default_str();
    train_cmd->add_option("--epsilon", train.params.epsilon)->capture_default_str();
    train_cmd->add_option("--gamma", train.params.gamma)->capture_default_str();
    train_cmd->add_option("--decay", train.params.decay)->capture_default_str();
    train_cmd->add_option("--seed", train.params.seed)->capture_default_str();
    train_cmd->add_option("--episode-unit", train.episode_unit, "steps or demands")
        ->check(CLI::IsMember({"steps", "demands"}))
        ->capture_default_str();
    train_cmd->add_option("--out", train.out, "Policy file")->required();
    train_cmd->add_option("--curve", train.curve, "Per-episode learning curve CSV");
    train_cmd->add_option("--curve-demands", train.params.curve_demands)->capture_default_str();
    train_cmd->add_option("--curve-seeds", train.params.curve_seeds)->capture_default_str();

    EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Simulate a policy over several seeds");
    evaluate_cmd->add_option("--policy", evaluate.policy, "Policy file")->required();
    evaluate_cmd->add_option("--config", evaluate.config, "System config JSON");
    evaluate_cmd->add_option("--demands", evaluate.demands, "Demands per seed")->capture_default_str();
    evaluate_cmd->add_option("--seeds", evaluate.seeds, "Number of seeds")->capture_default_str();
    evaluate_cmd->add_option("--seed", evaluate.seed, "Base seed")->capture_default_str();
    evaluate_cmd->add_option("--reference", evaluate.reference, "Reference policy for the optimality gap");
    evaluate_cmd->add_option("--trace", evaluate.trace, "Write the first seed's trajectory as JSON lines");

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run one experiment sweep and write its CSV");
    sweep_cmd->add_option("--kind", sweep.kind)
        ->required()
        ->check(CLI::IsMember({"episodes", "local_capacity", "offered_load", "federation_cost"}));
    sweep_cmd->add_option("--config", sweep.config, "Base system config JSON");
    sweep_cmd->add_option("--out", sweep.out, "Result CSV")->required();
    sweep_cmd->add_option("--jobs", sweep.jobs, "Concurrent cells")->capture_default_str()->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--seed", sweep.seed, "Seed base")->capture_default_str();
    sweep_cmd->add_option("--repetitions", sweep.repetitions)->capture_default_str();
    sweep_cmd->add_option("--demands", sweep.demands, "Evaluation demands per seed")->capture_default_str();
    sweep_cmd->add_option("--values", sweep.values, "Override the sweep grid")->delimiter(',');
    sweep_cmd->add_option("--algorithms", sweep.algorithms, "Subset of dp,greedy,QL-<gamma>,RL")->delimiter(',');
    sweep_cmd->add_option("--dp-gamma", sweep.dp_gamma)->capture_default_str();
    sweep_cmd->add_option("--discount-clock", sweep.clock)
        ->check(CLI::IsMember({"per_demand", "per_transition"}))
        ->capture_default_str();
    sweep_cmd->add_option("--episode-unit", sweep.episode_unit)
        ->check(CLI::IsMember({"steps", "demands"}))
        ->capture_default_str();
    sweep_cmd->add_option("--trace", sweep.trace, "Per-cell progress log");

    std::string report_csv;
    auto* report_cmd = app.add_subcommand("report", "Mean profit and gap per algorithm from a sweep CSV");
    report_cmd->add_option("csv", report_csv)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (argc <= 1) {
            err << app.help();
            return kExitUsage;
        }
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*validate_cmd) return run_validate(validate, out, err);
        if (*solve_cmd) return run_solve(solve, out);
        if (*train_cmd) return run_train(train, out);
        if (*evaluate_cmd) return run_evaluate(evaluate, out);
        if (*sweep_cmd) return run_sweep_command(sweep, out, err);
        if (*report_cmd) {
            out << report_table(read_csv(report_csv));
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvariant;
    }
    return kExitUsage;
}

} // namespace fedadm
