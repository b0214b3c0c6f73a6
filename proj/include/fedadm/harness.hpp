#pragma once

#include "fedadm/agents.hpp"
#include "fedadm/dp.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fedadm {

enum class ExperimentKind { Episodes, LocalCapacity, OfferedLoad, FederationCost };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

enum class AlgorithmKind { Dp, Greedy, QLearning, RLearning };

struct AlgorithmSpec {
    AlgorithmKind kind = AlgorithmKind::Dp;
    double gamma = 0.9; // Q-Learning only

    // "dp", "greedy", "QL-0.9", "RL"
    std::string label() const;
};

// Parses "dp", "greedy", "rl", "ql-<gamma>" (case-insensitive).
AlgorithmSpec algorithm_from_string(std::string_view name);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::Episodes;
    std::vector<double> sweep_values;
    std::vector<AlgorithmSpec> algorithms;
    std::size_t repetitions = 10;
    SystemConfig base_config;
    std::uint64_t eval_demands = 100'000;
    std::uint64_t seed_base = 0;
    LearningParams learning; // episodes overridden by the episodes sweep
    DpParams dp;

    void validate() const;
};

// Default grid for a sweep kind with the full algorithm list
// {dp, greedy, QL-0.5, QL-0.9, RL}.
ExperimentSpec default_experiment(ExperimentKind kind, const SystemConfig& base);
std::vector<double> default_sweep_values(ExperimentKind kind);

// Config of one sweep cell (LC override, load scale or cost scale).
SystemConfig cell_config(const ExperimentSpec& spec, double sweep_value);

struct ResultRow {
    std::string experiment;
    double sweep = 0.0;
    std::string algorithm;
    std::optional<std::uint64_t> seed; // empty on mean rows
    double avg_profit = 0.0;
    double gap = 0.0;
    double accepted = 0.0;
    double federated = 0.0;
    double rejected = 0.0;

    bool is_mean() const { return !seed.has_value(); }
};

inline constexpr const char* kCsvHeader = "experiment,sweep,algorithm,seed,avg_profit,gap,accepted,federated,rejected";

struct SweepResult {
    std::vector<ResultRow> rows;
    std::optional<std::string> failure; // failing cell and reason
};

struct SweepOptions {
    int jobs = 1;
    std::ostream* progress = nullptr;
};

// Per sweep value: DP solved once; each (algorithm, repetition) is one cell
// with its own seeds derived from (experiment, sweep value, algorithm,
// repetition). Row k of every algorithm is evaluated on common evaluation
// seed k and its gap taken against the DP row on the same seed. A mean row
// follows the seed rows of each (sweep value, algorithm).
SweepResult run_sweep(const ExperimentSpec& spec, const SweepOptions& options = {});

std::string format_row(const ResultRow& row);
void write_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(const std::filesystem::path& path);

// Mean profit and gap per (experiment, sweep, algorithm) from seed rows.
std::string report_table(const std::vector<ResultRow>& rows);

} // namespace fedadm
