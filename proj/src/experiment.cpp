#include "mvml/experiment.hpp"

#include "mvml/error.hpp"
#include "mvml/io.hpp"
#include "mvml/random.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace fs = std::filesystem;
using nlohmann::json;

namespace mvml {

namespace {

// Stream ids for per-repeat seeds.
constexpr std::uint64_t kSplitStream = 100;
constexpr std::uint64_t kCorruptStream = 200;
constexpr std::uint64_t kInitStream = 300;

template <class T>
void read_if(const json& j, const char* key, T& out)
{
    if (j.contains(key) && !j.at(key).is_null()) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception&) {
            throw Error(ErrorKind::InvalidInput, std::string("config: field '") + key + "' has the wrong type");
        }
    }
}

json metrics_to_json(const MetricsReport& m)
{
    return json{{"one_minus_hl", m.one_minus_hl}, {"one_minus_rl", m.one_minus_rl}, {"ap", m.ap},
                {"auc", m.auc},                   {"n_test", m.n_test},             {"c", m.c}};
}

MetricStats stats_of(const std::vector<double>& values)
{
    MetricStats s;
    if (values.empty()) {
        return s;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return s;
}

MultiViewDataset take_rows(const MultiViewDataset& ds, const IndexList& rows)
{
    std::vector<ViewData> views;
    for (const ViewData& v : ds.views()) {
        ViewData out;
        out.features = select_rows(v.features, rows);
        out.labels = select_rows(v.labels, rows);
        out.missing.reserve(rows.size());
        for (Eigen::Index j : rows) {
            out.missing.push_back(v.missing[static_cast<std::size_t>(j)]);
        }
        views.push_back(std::move(out));
    }
    return MultiViewDataset(std::move(views), ds.aligned());
}

} // namespace

void ExperimentConfig::validate() const
{
    if (!synthetic && data_path.empty()) {
        throw Error(ErrorKind::InvalidInput, "config: dataset needs a synthetic spec or a path");
    }
    if (synthetic) {
        synthetic->validate();
    }
    corruption.validate();
    solver.validate();
    if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
        throw Error(ErrorKind::InvalidInput, "config: train_fraction must lie in (0, 1)");
    }
    if (repeats < 1) {
        throw Error(ErrorKind::InvalidInput, "config: repeats must be >= 1");
    }
}

ExperimentConfig config_from_json(const json& j)
{
    if (!j.is_object()) {
        throw Error(ErrorKind::InvalidInput, "config: top level must be a JSON object");
    }
    ExperimentConfig cfg;
    if (j.contains("dataset")) {
        const json& d = j["dataset"];
        if (d.contains("path")) {
            cfg.data_path = d["path"].get<std::string>();
        }
        if (d.contains("synthetic")) {
            const json& s = d["synthetic"];
            SyntheticSpec spec;
            read_if(s, "n", spec.n);
            read_if(s, "c", spec.c);
            read_if(s, "dims", spec.dims);
            read_if(s, "positives_per_sample", spec.positives_per_sample);
            read_if(s, "noise_sigma", spec.noise_sigma);
            read_if(s, "cluster_spread", spec.cluster_spread);
            read_if(s, "seed", spec.seed);
            cfg.synthetic = spec;
        }
    }
    if (j.contains("corruption")) {
        const json& c = j["corruption"];
        read_if(c, "alpha", cfg.corruption.alpha);
        read_if(c, "beta", cfg.corruption.beta);
        read_if(c, "dealign", cfg.corruption.dealign);
        read_if(c, "seed", cfg.corruption.seed);
    }
    if (j.contains("solver")) {
        const json& s = j["solver"];
        read_if(s, "lambda", cfg.solver.lambda);
        read_if(s, "mu", cfg.solver.mu);
        read_if(s, "max_iters", cfg.solver.max_iters);
        read_if(s, "rel_tol", cfg.solver.rel_tol);
        read_if(s, "init_seed", cfg.solver.init_seed);
        if (s.contains("variant")) {
            cfg.solver.variant = variant_from_string(s["variant"].get<std::string>());
        }
    }
    if (j.contains("split")) {
        read_if(j["split"], "train_fraction", cfg.split.train_fraction);
        read_if(j["split"], "seed", cfg.split.seed);
    }
    read_if(j, "repeats", cfg.repeats);
    if (j.contains("output_dir")) {
        cfg.output_dir = j["output_dir"].get<std::string>();
    }
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg)
{
    json j;
    json dataset = json::object();
    if (cfg.synthetic) {
        const SyntheticSpec& s = *cfg.synthetic;
        dataset["synthetic"] = json{{"n", s.n},
                                    {"c", s.c},
                                    {"dims", s.dims},
                                    {"positives_per_sample", s.positives_per_sample},
                                    {"noise_sigma", s.noise_sigma},
                                    {"cluster_spread", s.cluster_spread},
                                    {"seed", s.seed}};
    }
    if (!cfg.data_path.empty()) {
        dataset["path"] = cfg.data_path.generic_string();
    }
    j["dataset"] = dataset;
    j["corruption"] = json{{"alpha", cfg.corruption.alpha},
                           {"beta", cfg.corruption.beta},
                           {"dealign", cfg.corruption.dealign},
                           {"seed", cfg.corruption.seed}};
    j["solver"] = json{{"lambda", cfg.solver.lambda},
                       {"mu", cfg.solver.mu},
                       {"max_iters", cfg.solver.max_iters},
                       {"rel_tol", cfg.solver.rel_tol},
                       {"variant", std::string(to_string(cfg.solver.variant))},
                       {"init_seed", cfg.solver.init_seed}};
    j["split"] = json{{"train_fraction", cfg.split.train_fraction}, {"seed", cfg.split.seed}};
    j["repeats"] = cfg.repeats;
    return j;
}

ExperimentConfig load_config(const fs::path& file)
{
    std::FILE* fp = std::fopen(file.string().c_str(), "rb");
    if (fp == nullptr) {
        throw Error(ErrorKind::MissingFile, "cannot open config " + file.string());
    }
    std::string text;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof(buf), fp)) > 0) {
        text.append(buf, got);
    }
    std::fclose(fp);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidInput, "config is not valid JSON: " + std::string(e.what()));
    }
    ExperimentConfig cfg = config_from_json(j);
    if (!cfg.data_path.empty() && cfg.data_path.is_relative()) {
        cfg.data_path = file.parent_path() / cfg.data_path;
    }
    return cfg;
}

std::string config_hash(const json& config)
{
    const std::string text = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

MultiViewDataset load_source(const ExperimentConfig& config)
{
    if (!config.data_path.empty()) {
        return load_dataset(config.data_path);
    }
    if (!config.synthetic) {
        throw Error(ErrorKind::InvalidInput, "config: no dataset source");
    }
    return generate_synthetic(*config.synthetic);
}

std::pair<MultiViewDataset, MultiViewDataset> split_dataset(const MultiViewDataset& ds, const SplitSpec& split)
{
    if (!ds.aligned()) {
        throw Error(ErrorKind::InvalidInput, "split: source dataset must be aligned");
    }
    for (const ViewData& v : ds.views()) {
        if (std::any_of(v.missing.begin(), v.missing.end(), [](std::uint8_t m) { return m != 0; })) {
            throw Error(ErrorKind::InvalidInput, "split: source dataset must be complete");
        }
    }
    const auto n = static_cast<std::size_t>(ds.n());
    const auto n_train = static_cast<std::size_t>(std::floor(split.train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train >= n) {
        throw Error(ErrorKind::InvalidInput, "split: train or test part would be empty");
    }
    Rng rng(split.seed);
    const auto perm = rng.permutation(n);
    IndexList train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    IndexList test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {take_rows(ds, train), take_rows(ds, test)};
}

void RunRecord::aggregate()
{
    std::vector<double> hl, rl, ap_values, auc_values;
    for (const RepeatResult& r : repeats) {
        hl.push_back(r.metrics.one_minus_hl);
        rl.push_back(r.metrics.one_minus_rl);
        ap_values.push_back(r.metrics.ap);
        auc_values.push_back(r.metrics.auc);
    }
    one_minus_hl = stats_of(hl);
    one_minus_rl = stats_of(rl);
    ap = stats_of(ap_values);
    auc = stats_of(auc_values);
}

RunRecord run_experiment(const ExperimentConfig& config, const MultiViewDataset& source)
{
    config.validate();
    RunRecord record;
    record.config = config_to_json(config);
    record.config_hash = config_hash(record.config);
    for (int r = 0; r < config.repeats; ++r) {
        const auto rep = static_cast<std::uint64_t>(r);
        try {
            SplitSpec split = config.split;
            split.seed = derive_seed(config.split.seed, kSplitStream, rep);
            auto [train, test] = split_dataset(source, split);

            CorruptionSpec corruption = config.corruption;
            corruption.seed = derive_seed(config.corruption.seed, kCorruptStream, rep);
            const MultiViewDataset corrupted = corrupt(train, corruption);

            SolverConfig solver = config.solver;
            solver.init_seed = derive_seed(config.solver.init_seed, kInitStream, rep);
            FitResult fitted = fit(corrupted, solver);

            const Matrix scores = predict(fitted.weights, test);
            RepeatResult result;
            result.metrics = evaluate(scores, test.view(0).labels);
            result.summary.iterations = static_cast<int>(fitted.trace.records.size());
            result.summary.converged = fitted.trace.converged;
            result.summary.initial_objective = fitted.trace.initial_objective;
            if (!fitted.trace.records.empty()) {
                const IterationRecord& last = fitted.trace.records.back();
                result.summary.final_objective = last.objective;
                result.summary.final_surrogate = last.surrogate;
                result.summary.final_residual = last.residual;
            }
            result.trace = std::move(fitted.trace);
            record.repeats.push_back(std::move(result));
        } catch (const Error& e) {
            throw Error(e.kind(), "repeat " + std::to_string(r) + ": " + e.what());
        }
    }
    record.aggregate();
    return record;
}

RunRecord run_experiment(const ExperimentConfig& config)
{
    config.validate();
    return run_experiment(config, load_source(config));
}

RankStudy rank_study(const ExperimentConfig& config, const MultiViewDataset& source)
{
    config.validate();
    SplitSpec split = config.split;
    split.seed = derive_seed(config.split.seed, kSplitStream, 0);
    auto [train, test] = split_dataset(source, split);
    CorruptionSpec corruption = config.corruption;
    corruption.seed = derive_seed(config.corruption.seed, kCorruptStream, 0);
    SolverConfig solver = config.solver;
    solver.init_seed = derive_seed(config.solver.init_seed, kInitStream, 0);
    FitResult fitted = fit(corrupt(train, corruption), solver);

    RankStudy study;
    const Matrix scores = predict(fitted.weights, test);
    const Matrix& truth = test.view(0).labels;
    std::vector<IndexList> rows(static_cast<std::size_t>(truth.cols()));
    for (Eigen::Index k = 0; k < truth.cols(); ++k) {
        for (Eigen::Index j = 0; j < truth.rows(); ++j) {
            if (truth(j, k) > 0.0) rows[static_cast<std::size_t>(k)].push_back(j);
        }
    }
    study.diagnostics = rank_diagnostics(scores, rows);
    study.metrics = evaluate(scores, truth);
    study.trace = std::move(fitted.trace);
    return study;
}

std::string study_table_csv(const std::vector<StudyRow>& rows)
{
    std::string out = "setting,one_minus_hl_mean,one_minus_hl_std,one_minus_rl_mean,one_minus_rl_std,"
                      "ap_mean,ap_std,auc_mean,auc_std,mean_iterations\n";
    for (const StudyRow& row : rows) {
        const RunRecord& r = row.record;
        double iters = 0.0;
        for (const RepeatResult& x : r.repeats) iters += x.summary.iterations;
        iters /= static_cast<double>(std::max<std::size_t>(r.repeats.size(), 1));
        out += row.setting;
        for (const MetricStats* s : {&r.one_minus_hl, &r.one_minus_rl, &r.ap, &r.auc}) {
            out += ',' + format_double(s->mean) + ',' + format_double(s->std);
        }
        out += ',' + format_double(iters) + '\n';
    }
    return out;
}

json study_to_json(const std::vector<StudyRow>& rows)
{
    json out = json::array();
    for (const StudyRow& row : rows) {
        out.push_back(json{{"setting", row.setting}, {"record", record_to_json(row.record)}});
    }
    return out;
}

ReportFormat report_format_from_string(const std::string& name)
{
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    throw Error(ErrorKind::InvalidInput, "unknown report format '" + name + "'");
}

json record_to_json(const RunRecord& record)
{
    json j;
    j["config_hash"] = record.config_hash;
    j["config"] = record.config;
    j["repeats"] = json::array();
    for (const RepeatResult& r : record.repeats) {
        j["repeats"].push_back(json{{"metrics", metrics_to_json(r.metrics)},
                                    {"trace",
                                     {{"iterations", r.summary.iterations},
                                      {"converged", r.summary.converged},
                                      {"initial_objective", r.summary.initial_objective},
                                      {"final_objective", r.summary.final_objective},
                                      {"final_surrogate", r.summary.final_surrogate},
                                      {"final_residual", r.summary.final_residual}}}});
    }
    auto stat = [](const MetricStats& s) { return json{{"mean", s.mean}, {"std", s.std}}; };
    j["summary"] = json{{"one_minus_hl", stat(record.one_minus_hl)},
                        {"one_minus_rl", stat(record.one_minus_rl)},
                        {"ap", stat(record.ap)},
                        {"auc", stat(record.auc)}};
    return j;
}

RunRecord record_from_json(const json& j)
{
    RunRecord record;
    try {
        record.config_hash = j.at("config_hash").get<std::string>();
        record.config = j.at("config");
        for (const json& r : j.at("repeats")) {
            RepeatResult result;
            const json& m = r.at("metrics");
            result.metrics.one_minus_hl = m.at("one_minus_hl").get<double>();
            result.metrics.one_minus_rl = m.at("one_minus_rl").get<double>();
            result.metrics.ap = m.at("ap").get<double>();
            result.metrics.auc = m.at("auc").get<double>();
            result.metrics.n_test = m.at("n_test").get<Eigen::Index>();
            result.metrics.c = m.at("c").get<Eigen::Index>();
            const json& t = r.at("trace");
            result.summary.iterations = t.at("iterations").get<int>();
            result.summary.converged = t.at("converged").get<bool>();
            result.summary.initial_objective = t.at("initial_objective").get<double>();
            result.summary.final_objective = t.at("final_objective").get<double>();
            result.summary.final_surrogate = t.at("final_surrogate").get<double>();
            result.summary.final_residual = t.at("final_residual").get<double>();
            record.repeats.push_back(std::move(result));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaViolation, std::string("report: ") + e.what());
    }
    record.aggregate();
    return record;
}

std::string repeats_csv(const RunRecord& record)
{
    std::string out = "repeat,one_minus_hl,one_minus_rl,ap,auc,iterations,converged,final_objective\n";
    for (std::size_t r = 0; r < record.repeats.size(); ++r) {
        const RepeatResult& x = record.repeats[r];
        out += std::to_string(r) + ',' + format_double(x.metrics.one_minus_hl) + ',' +
               format_double(x.metrics.one_minus_rl) + ',' + format_double(x.metrics.ap) + ',' +
               format_double(x.metrics.auc) + ',' + std::to_string(x.summary.iterations) + ',' +
               (x.summary.converged ? "1" : "0") + ',' + format_double(x.summary.final_objective) + '\n';
    }
    return out;
}

std::string summary_csv(const RunRecord& record)
{
    std::string out = "metric,mean,std";
    for (std::size_t r = 0; r < record.repeats.size(); ++r) {
        out += ",r" + std::to_string(r);
    }
    out += '\n';
    auto row = [&](const char* name, const MetricStats& s, double MetricsReport::*field) {
        out += std::string(name) + ',' + format_double(s.mean) + ',' + format_double(s.std);
        for (const RepeatResult& x : record.repeats) {
            out += ',' + format_double(x.metrics.*field);
        }
        out += '\n';
    };
    row("one_minus_hl", record.one_minus_hl, &MetricsReport::one_minus_hl);
    row("one_minus_rl", record.one_minus_rl, &MetricsReport::one_minus_rl);
    row("ap", record.ap, &MetricsReport::ap);
    row("auc", record.auc, &MetricsReport::auc);
    return out;
}

std::string convergence_csv(const SolverTrace& trace)
{
    std::string out = "iteration,f,J,residual\n";
    for (const IterationRecord& rec : trace.records) {
        out += std::to_string(rec.iteration) + ',' + format_double(rec.objective) + ',' +
               format_double(rec.surrogate) + ',' + format_double(rec.residual) + '\n';
    }
    return out;
}

void export_report(const RunRecord& record, ReportFormat format, const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
    }
    if (format == ReportFormat::Json) {
        write_file_atomic(dir / "report.json", record_to_json(record).dump(2) + "\n");
        json timings = json::array();
        for (const RepeatResult& r : record.repeats) {
            json secs = json::array();
            for (const IterationRecord& rec : r.trace.records) {
                secs.push_back(rec.seconds);
            }
            timings.push_back(secs);
        }
        write_file_atomic(dir / "timings.json", json{{"iteration_seconds", timings}}.dump() + "\n");
    } else {
        write_file_atomic(dir / "repeats.csv", repeats_csv(record));
        write_file_atomic(dir / "summary.csv", summary_csv(record));
    }
    for (std::size_t r = 0; r < record.repeats.size(); ++r) {
        write_file_atomic(dir / ("convergence_r" + std::to_string(r) + ".csv"),
                          convergence_csv(record.repeats[r].trace));
    }
}

Matrix full_svd_subgradient(const Matrix& a)
{
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sigma = svd.singularValues();
    const double top = sigma.size() > 0 ? sigma(0) : 0.0;
    const double cutoff = 1e-10 * std::max(top * top, 1.0);
    Eigen::Index rank = 0;
    while (rank < sigma.size() && sigma(rank) * sigma(rank) > cutoff) {
        ++rank;
    }
    return svd.matrixU().leftCols(rank) * svd.matrixV().leftCols(rank).transpose();
}

std::vector<BenchRow> bench_subgradient(const std::vector<BenchSize>& sizes, int repeats,
                                        double oracle_memory_bytes, std::uint64_t seed)
{
    if (repeats < 1) {
        throw Error(ErrorKind::InvalidInput, "bench: repeats must be >= 1");
    }
    using clock = std::chrono::steady_clock;
    std::vector<BenchRow> rows;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        const BenchSize size = sizes[s];
        if (size.n < 1 || size.c < 1) {
            throw Error(ErrorKind::InvalidInput, "bench: sizes must be positive");
        }
        Rng rng(derive_seed(seed, s));
        Matrix a(size.n, size.c);
        for (Eigen::Index q = 0; q < size.c; ++q) {
            for (Eigen::Index r = 0; r < size.n; ++r) {
                a(r, q) = rng.normal();
            }
        }
        BenchRow row;
        row.size = size;
        double total = 0.0;
        for (int t = 0; t < repeats; ++t) {
            const auto start = clock::now();
            Matrix g = trace_norm_subgradient(a);
            total += std::chrono::duration<double>(clock::now() - start).count();
            if (g.size() == 0) std::abort();
        }
        row.gram_seconds = total / repeats;
        const double oracle_bytes = 8.0 * static_cast<double>(size.n) * static_cast<double>(size.n);
        if (oracle_bytes <= oracle_memory_bytes) {
            double oracle_total = 0.0;
            for (int t = 0; t < repeats; ++t) {
                const auto start = clock::now();
                Matrix g = full_svd_subgradient(a);
                oracle_total += std::chrono::duration<double>(clock::now() - start).count();
                if (g.size() == 0) std::abort();
            }
            row.oracle_seconds = oracle_total / repeats;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string bench_table_csv(const std::vector<BenchRow>& rows)
{
    std::string out = "n,c,gram_seconds,full_svd_seconds\n";
    for (const BenchRow& r : rows) {
        out += std::to_string(r.size.n) + ',' + std::to_string(r.size.c) + ',' + format_double(r.gram_seconds) +
               ',' + (r.oracle_seconds ? format_double(*r.oracle_seconds) : std::string("-")) + '\n';
    }
    return out;
}

} // namespace mvml
