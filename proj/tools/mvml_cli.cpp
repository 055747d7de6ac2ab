// Command-line front end. Exit codes: 0 success, 1 validation error,
// 2 numerical failure.

#include "mvml/error.hpp"
#include "mvml/experiment.hpp"
#include "mvml/io.hpp"
#include "mvml/masking.hpp"
#include "mvml/metrics.hpp"
#include "mvml/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mvml;

namespace {

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "json";
};

// Experiment-level overrides shared by the study commands.
struct Overrides {
    std::optional<int> repeats;
    std::optional<double> lambda;
    std::optional<double> mu;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<int> max_iters;
    std::optional<std::string> variant;
    std::string data;
};

void add_overrides(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--data", o.data, "Dataset directory (replaces the configured source)");
    cmd->add_option("--repeats", o.repeats, "Number of repeats");
    cmd->add_option("--lambda", o.lambda, "Regularization weight");
    cmd->add_option("--mu", o.mu, "ADMM penalty");
    cmd->add_option("--alpha", o.alpha, "Incomplete-view ratio");
    cmd->add_option("--beta", o.beta, "Missing-label ratio");
    cmd->add_option("--max-iters", o.max_iters, "Iteration cap");
    cmd->add_option("--variant", o.variant, "full | loss-only | loss-plus-local");
}

ExperimentConfig resolve_config(const GlobalOptions& g, const Overrides& o)
{
    ExperimentConfig cfg;
    if (!g.config.empty()) {
        cfg = load_config(g.config);
    } else {
        cfg.synthetic = SyntheticSpec{};
        cfg.corruption = CorruptionSpec{0.5, 0.5, true, 0};
    }
    if (g.seed) {
        if (cfg.synthetic) cfg.synthetic->seed = *g.seed;
        cfg.corruption.seed = *g.seed;
        cfg.split.seed = *g.seed;
        cfg.solver.init_seed = *g.seed;
    }
    if (!o.data.empty()) {
        cfg.data_path = o.data;
        cfg.synthetic.reset();
    }
    if (o.repeats) cfg.repeats = *o.repeats;
    if (o.lambda) cfg.solver.lambda = *o.lambda;
    if (o.mu) cfg.solver.mu = *o.mu;
    if (o.alpha) cfg.corruption.alpha = *o.alpha;
    if (o.beta) cfg.corruption.beta = *o.beta;
    if (o.max_iters) cfg.solver.max_iters = *o.max_iters;
    if (o.variant) cfg.solver.variant = variant_from_string(*o.variant);
    if (!g.out.empty()) cfg.output_dir = g.out;
    cfg.validate();
    return cfg;
}

std::string format_setting(double x)
{
    std::ostringstream os;
    os << x;
    return os.str();
}

void emit_study(const std::vector<StudyRow>& rows, const GlobalOptions& g, const std::string& stem)
{
    const ReportFormat format = report_format_from_string(g.format);
    const std::string text =
        format == ReportFormat::Json ? study_to_json(rows).dump(2) + "\n" : study_table_csv(rows);
    if (!g.out.empty()) {
        fs::create_directories(g.out);
        write_file_atomic(fs::path(g.out) / (stem + (format == ReportFormat::Json ? ".json" : ".csv")), text);
        for (const StudyRow& row : rows) {
            export_report(row.record, format, fs::path(g.out) / (stem + "_" + row.setting));
        }
    }
    std::cout << (format == ReportFormat::Json ? text : study_table_csv(rows));
}

json metrics_json(const MetricsReport& m)
{
    return json{{"one_minus_hl", m.one_minus_hl}, {"one_minus_rl", m.one_minus_rl}, {"ap", m.ap}, {"auc", m.auc}};
}

std::string require_out(const GlobalOptions& g, const char* cmd)
{
    if (g.out.empty()) {
        throw Error(ErrorKind::InvalidInput, std::string(cmd) + ": --out is required");
    }
    return g.out;
}

std::vector<BenchSize> parse_sizes(const std::vector<std::string>& specs)
{
    std::vector<BenchSize> sizes;
    for (const std::string& s : specs) {
        const auto colon = s.find(':');
        if (colon == std::string::npos) {
            throw Error(ErrorKind::InvalidInput, "size '" + s + "' is not of the form n:c");
        }
        try {
            sizes.push_back({std::stol(s.substr(0, colon)), std::stol(s.substr(colon + 1))});
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidInput, "size '" + s + "' is not of the form n:c");
        }
    }
    return sizes;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-view multi-label learning on non-aligned, incomplete data"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config, "Experiment config (JSON)");
    app.add_option("--seed", g.seed, "Seed overriding every configured seed");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));

    // synth
    SyntheticSpec synth_spec;
    auto* synth = app.add_subcommand("synth", "Generate a planted synthetic dataset");
    synth->add_option("--n", synth_spec.n, "Samples");
    synth->add_option("--c", synth_spec.c, "Labels");
    synth->add_option("--dims", synth_spec.dims, "Per-view dimensions");
    synth->add_option("--positives", synth_spec.positives_per_sample, "Mean positives per sample");
    synth->add_option("--noise", synth_spec.noise_sigma, "Feature noise standard deviation");
    synth->add_option("--spread", synth_spec.cluster_spread, "Within-cluster spread");

    // corrupt
    std::string corrupt_data;
    CorruptionSpec corrupt_spec;
    auto* corrupt_cmd = app.add_subcommand("corrupt", "Apply view, label and alignment corruption");
    corrupt_cmd->add_option("--data", corrupt_data, "Input dataset directory")->required();
    corrupt_cmd->add_option("--alpha", corrupt_spec.alpha, "Incomplete-view ratio");
    corrupt_cmd->add_option("--beta", corrupt_spec.beta, "Missing-label ratio");
    corrupt_cmd->add_flag("--dealign", corrupt_spec.dealign, "Permute the rows of every view");

    // fit
    std::string fit_data;
    SolverConfig fit_cfg;
    std::string fit_variant = "full";
    auto* fit_cmd = app.add_subcommand("fit", "Train on a dataset directory");
    fit_cmd->add_option("--data", fit_data, "Training dataset directory")->required();
    fit_cmd->add_option("--lambda", fit_cfg.lambda, "Regularization weight");
    fit_cmd->add_option("--mu", fit_cfg.mu, "ADMM penalty");
    fit_cmd->add_option("--max-iters", fit_cfg.max_iters, "Iteration cap");
    fit_cmd->add_option("--rel-tol", fit_cfg.rel_tol, "Relative objective change for convergence");
    fit_cmd->add_option("--variant", fit_variant, "full | loss-only | loss-plus-local");

    // predict
    std::string predict_data, predict_weights;
    auto* predict_cmd = app.add_subcommand("predict", "Score a dataset with trained weights");
    predict_cmd->add_option("--data", predict_data, "Dataset directory")->required();
    predict_cmd->add_option("--weights", predict_weights, "Weights file")->required();

    // evaluate
    std::string eval_weights;
    Overrides eval_o;
    auto* eval_cmd = app.add_subcommand(
        "evaluate", "Run the configured repeated experiment, or score --weights on --data");
    add_overrides(eval_cmd, eval_o);
    eval_cmd->add_option("--weights", eval_weights, "Weights file (scores --data instead of training)");

    Overrides ablate_o;
    auto* ablate = app.add_subcommand("ablate", "Compare the full model with its two ablations");
    add_overrides(ablate, ablate_o);

    Overrides sweep_o;
    std::vector<double> lambda_grid = {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0};
    auto* sweep = app.add_subcommand("sweep-lambda", "Repeated experiment per lambda");
    add_overrides(sweep, sweep_o);
    sweep->add_option("--grid", lambda_grid, "Lambda values");

    Overrides mu_o;
    std::vector<double> mu_grid = {1.0, 5.0, 10.0};
    auto* study_mu = app.add_subcommand("study-mu", "Repeated experiment per mu");
    add_overrides(study_mu, mu_o);
    study_mu->add_option("--grid", mu_grid, "Mu values");

    std::vector<std::string> bench_sizes = {"10000:100", "20000:100", "40000:100"};
    int bench_repeats = 10;
    double bench_guard = 1024.0 * 1024.0 * 1024.0;
    auto* bench = app.add_subcommand("bench-subgrad", "Time the trace-norm subgradient kernels");
    bench->add_option("--sizes", bench_sizes, "Sizes as n:c");
    bench->add_option("--repeats", bench_repeats, "Timing repeats per size");
    bench->add_option("--oracle-guard-bytes", bench_guard, "Skip the full SVD above this many bytes of U");

    Overrides rank_o;
    auto* rank_cmd = app.add_subcommand("rank-diag", "Rank and nuclear-norm diagnostics of one fit");
    add_overrides(rank_cmd, rank_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (synth->parsed()) {
            if (g.seed) synth_spec.seed = *g.seed;
            const auto out = require_out(g, "synth");
            save_dataset(generate_synthetic(synth_spec), out);
            std::cout << "wrote " << out << "\n";
        } else if (corrupt_cmd->parsed()) {
            if (g.seed) corrupt_spec.seed = *g.seed;
            const auto out = require_out(g, "corrupt");
            const MultiViewDataset corrupted = corrupt(load_dataset(corrupt_data), corrupt_spec);
            save_dataset(corrupted, out);
            std::cout << "wrote " << out << " (" << observed_count(corrupted) << " observed tags)\n";
        } else if (fit_cmd->parsed()) {
            if (g.seed) fit_cfg.init_seed = *g.seed;
            fit_cfg.variant = variant_from_string(fit_variant);
            const auto out = require_out(g, "fit");
            const FitResult result = fit(load_dataset(fit_data), fit_cfg);
            fs::create_directories(out);
            save_weights(result.weights, fs::path(out) / "weights.json");
            write_file_atomic(fs::path(out) / "convergence.csv", convergence_csv(result.trace));
            std::cout << "iterations " << result.trace.records.size() << ", converged "
                      << (result.trace.converged ? "yes" : "no") << "\n";
        } else if (predict_cmd->parsed()) {
            const Matrix scores = predict(load_weights(predict_weights), load_dataset(predict_data));
            if (g.out.empty()) {
                std::cout << matrix_to_csv(scores);
            } else {
                fs::create_directories(g.out);
                save_matrix_csv(scores, fs::path(g.out) / "scores.csv");
            }
        } else if (eval_cmd->parsed()) {
            if (!eval_weights.empty()) {
                if (eval_o.data.empty()) {
                    throw Error(ErrorKind::InvalidInput, "evaluate: --weights needs --data");
                }
                const MultiViewDataset ds = load_dataset(eval_o.data);
                const MetricsReport m = evaluate(predict(load_weights(eval_weights), ds), ds.view(0).labels);
                std::cout << metrics_json(m).dump(2) << "\n";
            } else {
                const ExperimentConfig cfg = resolve_config(g, eval_o);
                const RunRecord record = run_experiment(cfg);
                if (!cfg.output_dir.empty()) {
                    export_report(record, report_format_from_string(g.format), cfg.output_dir);
                }
                if (g.format == "csv") {
                    std::cout << summary_csv(record);
                } else {
                    std::cout << record_to_json(record)["summary"].dump(2) << "\n";
                }
            }
        } else if (ablate->parsed()) {
            const ExperimentConfig base = resolve_config(g, ablate_o);
            const MultiViewDataset source = load_source(base);
            std::vector<StudyRow> rows;
            for (Variant v : {Variant::LossOnly, Variant::LossPlusLocal, Variant::Full}) {
                ExperimentConfig cfg = base;
                cfg.solver.variant = v;
                rows.push_back({std::string(to_string(v)), run_experiment(cfg, source)});
            }
            emit_study(rows, g, "ablation");
        } else if (sweep->parsed() || study_mu->parsed()) {
            const bool is_lambda = sweep->parsed();
            const ExperimentConfig base = resolve_config(g, is_lambda ? sweep_o : mu_o);
            const MultiViewDataset source = load_source(base);
            std::vector<StudyRow> rows;
            for (double value : is_lambda ? lambda_grid : mu_grid) {
                ExperimentConfig cfg = base;
                (is_lambda ? cfg.solver.lambda : cfg.solver.mu) = value;
                rows.push_back({(is_lambda ? "lambda=" : "mu=") + format_setting(value), run_experiment(cfg, source)});
            }
            emit_study(rows, g, is_lambda ? "sweep_lambda" : "study_mu");
        } else if (bench->parsed()) {
            const auto rows = bench_subgradient(parse_sizes(bench_sizes), bench_repeats, bench_guard,
                                                g.seed.value_or(0));
            std::string text;
            if (g.format == "csv") {
                text = bench_table_csv(rows);
            } else {
                json j = json::array();
                for (const BenchRow& r : rows) {
                    j.push_back(json{{"n", r.size.n},
                                     {"c", r.size.c},
                                     {"gram_seconds", r.gram_seconds},
                                     {"full_svd_seconds", r.oracle_seconds ? json(*r.oracle_seconds) : json("-")}});
                }
                text = j.dump(2) + "\n";
            }
            if (!g.out.empty()) {
                fs::create_directories(g.out);
                write_file_atomic(fs::path(g.out) / (g.format == "csv" ? "bench.csv" : "bench.json"), text);
            }
            std::cout << text;
        } else if (rank_cmd->parsed()) {
            const ExperimentConfig cfg = resolve_config(g, rank_o);
            const RankStudy study = rank_study(cfg, load_source(cfg));
            const RankDiagnostics& d = study.diagnostics;
            json j{{"entire_rank", d.entire_rank},
                   {"entire_nuclear", d.entire_nuclear},
                   {"sub_ranks", d.sub_ranks},
                   {"sub_nuclear", d.sub_nuclear},
                   {"sub_rank_mean", d.sub_rank_mean},
                   {"sub_nuclear_mean", d.sub_nuclear_mean},
                   {"sub_nuclear_median", d.sub_nuclear_median},
                   {"iterations", study.trace.records.size()},
                   {"converged", study.trace.converged},
                   {"metrics", metrics_json(study.metrics)}};
            if (!g.out.empty()) {
                fs::create_directories(g.out);
                write_file_atomic(fs::path(g.out) / "rank_diag.json", j.dump(2) + "\n");
            }
            std::cout << j.dump(2) << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_numerical(e.kind()) ? 2 : 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error [IoError]: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error [InvalidInput]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
