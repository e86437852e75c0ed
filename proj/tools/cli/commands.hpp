#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fspr/io.hpp>
#include <fspr/solver_report.hpp>

namespace fspr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitDenseCap = 4;
inline constexpr int kExitNoConvergence = 5;

/// Maps a library exception to the process exit code.
int exit_code_for(const std::exception &e);

struct InputOptions {
    std::string edges_path;
    std::string labels_path;
    std::string synth;
    /// Overrides the seed inside `synth`.
    std::optional<std::uint64_t> seed;
    bool dedup = false;
};

/// Exactly one of edges+labels or synth must be set; ParseError otherwise.
LabeledGraph load_input(const InputOptions &input, Record *meta = nullptr);

struct SolveOptions {
    std::string method = "gmres";
    double nu = 0.15;
    std::optional<double> target;
    /// Method-specific default when unset.
    std::optional<double> tol;
    std::size_t restart = 50;
    std::size_t dense_cap = 5000;
};

struct RankRun {
    std::vector<double> scores;
    SolverReport report;
    /// Method-specific report fields.
    Record extras;
};

/// Runs one ranking method; report.wall_time_seconds covers the solve only.
RankRun rank_graph(const LabeledGraph &input, const SolveOptions &solve);

struct OutputOptions {
    std::filesystem::path dir = ".";
    OutputFormat format = OutputFormat::Csv;
};

/// Writes scores.<ext>, report.<ext> and, when the solver keeps a residual
/// history, residuals.<ext>. Returns the paths written.
std::vector<std::filesystem::path> cmd_rank(const InputOptions &input, const SolveOptions &solve,
                                            const OutputOptions &output);

struct CompareOptions {
    std::vector<std::size_t> topk{50, 100, 200};
    double nu = 0.15;
    std::optional<double> target;
    double bin_factor = 1.05;
};

struct CompareOutputs {
    Record comparison;
    /// Per (k_in, k_out, group) class: baseline, approx and closed-form means.
    Table class_means;
    /// Log-binned mean score against in-degree per group, with the closed form.
    Table degree_curve;
    /// Log-binned intra-class CV against in-degree per group, with the prediction.
    Table cv_curve;
};

/// Aligns both tables by node id (NodeSetMismatch if the id sets or the
/// per-node degrees and groups differ) and computes every comparison output.
/// `labels`, when given, replaces the group column of the score files.
CompareOutputs compare_tables(
    const ScoreTable &baseline, const ScoreTable &approx, const CompareOptions &opts,
    const std::optional<std::vector<std::pair<std::int64_t, Group>>> &labels = std::nullopt);

std::vector<std::filesystem::path> cmd_compare(const std::filesystem::path &baseline,
                                               const std::filesystem::path &approx,
                                               const std::optional<std::filesystem::path> &labels,
                                               const CompareOptions &opts,
                                               const OutputOptions &output);

struct BenchOptions {
    std::vector<std::string> synth;
    std::vector<std::string> methods{"exact", "gmres", "meanfield"};
    /// Each timing is the minimum over this many runs.
    std::size_t repeats = 1;
    SolveOptions solve;
};

/// One row per (graph, method). Methods that fail record the error in the row.
Table bench_table(const BenchOptions &opts);

/// Writes edges.tsv, labels.tsv and a synth.<ext> metadata record.
std::vector<std::filesystem::path> cmd_synth(const InputOptions &input,
                                             const OutputOptions &output);

/// Full command line, argv[0] included. Never throws; returns the exit code.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace fspr::cli
