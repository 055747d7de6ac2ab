#pragma once

// Repeated train/test experiments, parameter studies, the subgradient
// benchmark and report serialization.
//
// Protocol of one repeat r (all seeds derived from the configured bases):
//   1. split the clean, aligned dataset into train/test by train_fraction,
//   2. corrupt the training split only,
//   3. fit on the corrupted training split,
//   4. predict on the clean test split and score all four metrics.

#include "mvml/masking.hpp"
#include "mvml/metrics.hpp"
#include "mvml/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mvml {

struct SplitSpec {
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
};

struct ExperimentConfig {
    std::optional<SyntheticSpec> synthetic; // used when data_path is empty
    std::filesystem::path data_path;
    CorruptionSpec corruption;
    SolverConfig solver;
    SplitSpec split;
    int repeats = 10;
    std::filesystem::path output_dir;

    void validate() const;
};

struct TraceSummary {
    int iterations = 0;
    bool converged = false;
    double initial_objective = 0.0;
    double final_objective = 0.0;
    double final_surrogate = 0.0;
    double final_residual = 0.0;
};

struct RepeatResult {
    MetricsReport metrics;
    TraceSummary summary;
    SolverTrace trace;
};

struct MetricStats {
    double mean = 0.0;
    double std = 0.0; // sample standard deviation; 0 for a single repeat
};

struct RunRecord {
    std::string config_hash;
    nlohmann::json config;
    std::vector<RepeatResult> repeats;
    MetricStats one_minus_hl, one_minus_rl, ap, auc;

    /// Recomputes the aggregate statistics from the per-repeat entries.
    void aggregate();
};

/// Parses the JSON form of an experiment config. Missing fields keep defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& file);

/// 16 hex digits of FNV-1a over the canonical JSON dump.
std::string config_hash(const nlohmann::json& config);

/// Source dataset of the config (generated or loaded).
MultiViewDataset load_source(const ExperimentConfig& config);

/// Partitions an aligned, complete dataset into (train, test).
std::pair<MultiViewDataset, MultiViewDataset> split_dataset(const MultiViewDataset& ds,
                                                            const SplitSpec& split);

RunRecord run_experiment(const ExperimentConfig& config);
/// Same as above on an already loaded source dataset.
RunRecord run_experiment(const ExperimentConfig& config, const MultiViewDataset& source);

/// One labelled run of a parameter study (ablation, lambda sweep, mu study).
struct StudyRow {
    std::string setting;
    RunRecord record;
};

/// Columns setting, then mean and std of each metric, then mean iterations.
std::string study_table_csv(const std::vector<StudyRow>& rows);
nlohmann::json study_to_json(const std::vector<StudyRow>& rows);

/// Fit of the first repeat, with rank diagnostics of the predicted test label
/// matrix. Sub-label rows are the test samples carrying each label.
struct RankStudy {
    RankDiagnostics diagnostics;
    MetricsReport metrics;
    SolverTrace trace;
};
RankStudy rank_study(const ExperimentConfig& config, const MultiViewDataset& source);

enum class ReportFormat { Json, Csv };
ReportFormat report_format_from_string(const std::string& name);

/// JSON: report.json (deterministic) and timings.json (wall times).
/// CSV: repeats.csv (one row per repeat), summary.csv (metric, mean, std,
/// per-repeat values). Both formats also write convergence_r<k>.csv with
/// columns iteration,f,J,residual.
void export_report(const RunRecord& record, ReportFormat format, const std::filesystem::path& dir);

nlohmann::json record_to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);
std::string repeats_csv(const RunRecord& record);
std::string summary_csv(const RunRecord& record);
std::string convergence_csv(const SolverTrace& trace);

struct BenchSize {
    Eigen::Index n = 0;
    Eigen::Index c = 0;
};

struct BenchRow {
    BenchSize size;
    double gram_seconds = 0.0;           // mean over repeats
    std::optional<double> oracle_seconds; // empty when skipped by the memory guard
};

/// Times the Gram-route subgradient against a full SVD (U is n x n) on
/// random Gaussian matrices. The SVD is skipped when n * n doubles exceed
/// oracle_memory_bytes.
std::vector<BenchRow> bench_subgradient(const std::vector<BenchSize>& sizes, int repeats = 10,
                                        double oracle_memory_bytes = 1024.0 * 1024.0 * 1024.0,
                                        std::uint64_t seed = 0);
/// Columns n,c,gram_seconds,full_svd_seconds; '-' marks a skipped oracle.
std::string bench_table_csv(const std::vector<BenchRow>& rows);

/// Subgradient via a full SVD: U(:, 1:r) V(:, 1:r)^T with r the numeric rank.
Matrix full_svd_subgradient(const Matrix& a);

} // namespace mvml
