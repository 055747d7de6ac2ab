#include "mvml/error.hpp"
#include "mvml/experiment.hpp"
#include "mvml/io.hpp"
#include "mvml/random.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace mvml;
using nlohmann::json;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig cfg;
    SyntheticSpec s;
    s.n = 150;
    s.c = 6;
    s.dims = {5, 7, 9};
    s.positives_per_sample = 2.0;
    s.seed = 3;
    cfg.synthetic = s;
    cfg.corruption = CorruptionSpec{0.3, 0.5, true, 4};
    cfg.solver.max_iters = 60;
    cfg.split.seed = 5;
    cfg.repeats = 3;
    return cfg;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_SUITE("experiment")
{
    TEST_CASE("config json round trip and hash")
    {
        const ExperimentConfig cfg = small_config();
        const json j = config_to_json(cfg);
        const ExperimentConfig back = config_from_json(j);
        CHECK(config_to_json(back) == j);
        CHECK(config_hash(j).size() == 16);
        CHECK(config_hash(j) == config_hash(config_to_json(back)));
        ExperimentConfig other = cfg;
        other.solver.lambda = 0.6;
        CHECK(config_hash(config_to_json(other)) != config_hash(j));
    }

    TEST_CASE("config validation")
    {
        ExperimentConfig cfg = small_config();
        cfg.split.train_fraction = 1.0;
        CHECK_THROWS_AS(cfg.validate(), Error);
        cfg = small_config();
        cfg.repeats = 0;
        CHECK_THROWS_AS(cfg.validate(), Error);
        cfg = small_config();
        cfg.synthetic.reset();
        CHECK_THROWS_AS(cfg.validate(), Error);
        CHECK_THROWS_AS(config_from_json(json{{"repeats", "many"}}), Error);
        CHECK_THROWS_AS(config_from_json(json::array()), Error);
    }

    TEST_CASE("split partitions the samples")
    {
        const ExperimentConfig cfg = small_config();
        const MultiViewDataset source = load_source(cfg);
        const auto [train, test] = split_dataset(source, SplitSpec{0.7, 9});
        CHECK(train.n() == 105);
        CHECK(test.n() == 45);
        // rows are distinct samples: match every row of the source exactly once
        std::multiset<std::vector<double>> all, parts;
        auto add = [](std::multiset<std::vector<double>>& set, const Matrix& m) {
            for (Eigen::Index j = 0; j < m.rows(); ++j) set.insert(std::vector<double>(m.row(j).begin(), m.row(j).end()));
        };
        add(all, source.view(0).features);
        add(parts, train.view(0).features);
        add(parts, test.view(0).features);
        CHECK(all == parts);
        CHECK_THROWS_AS(split_dataset(corrupt(source, CorruptionSpec{0.2, 0.0, false, 1}), SplitSpec{}), Error);
    }

    TEST_CASE("least-squares pipeline equals a direct fit")
    {
        ExperimentConfig cfg = small_config();
        cfg.repeats = 1;
        cfg.corruption = CorruptionSpec{0.0, 0.0, false, 1};
        cfg.solver.lambda = 0.0;
        cfg.solver.variant = Variant::LossOnly;
        const MultiViewDataset source = load_source(cfg);
        const RunRecord record = run_experiment(cfg, source);

        SplitSpec split = cfg.split;
        split.seed = derive_seed(cfg.split.seed, 100, 0);
        const auto [train, test] = split_dataset(source, split);
        SolverConfig solver = cfg.solver;
        solver.init_seed = derive_seed(cfg.solver.init_seed, 300, 0);
        const MetricsReport direct = evaluate(predict(fit(train, solver).weights, test), test.view(0).labels);
        const MetricsReport& got = record.repeats.at(0).metrics;
        CHECK(got.one_minus_hl == direct.one_minus_hl);
        CHECK(got.one_minus_rl == direct.one_minus_rl);
        CHECK(got.ap == direct.ap);
        CHECK(got.auc == direct.auc);
    }

    TEST_CASE("runs are deterministic and reports round trip")
    {
        const ExperimentConfig cfg = small_config();
        const RunRecord a = run_experiment(cfg);
        const RunRecord b = run_experiment(cfg);
        CHECK(record_to_json(a).dump() == record_to_json(b).dump());
        CHECK(a.repeats.size() == 3);

        const json j = record_to_json(a);
        const RunRecord back = record_from_json(json::parse(j.dump()));
        CHECK(record_to_json(back) == j);
        CHECK(back.auc.mean == a.auc.mean);
        CHECK_THROWS_AS(record_from_json(json{{"config_hash", 1}}), Error);
    }

    TEST_CASE("aggregate statistics follow the repeats")
    {
        RunRecord r;
        for (double v : {0.5, 0.7, 0.9}) {
            RepeatResult x;
            x.metrics.auc = v;
            r.repeats.push_back(x);
        }
        r.aggregate();
        CHECK(r.auc.mean == doctest::Approx(0.7));
        CHECK(r.auc.std == doctest::Approx(0.2));
    }

    TEST_CASE("exported files")
    {
        const ExperimentConfig cfg = small_config();
        const RunRecord rec = run_experiment(cfg);
        const fs::path dir = fs::temp_directory_path() / ("mvml_exp_" + std::to_string(std::random_device{}()));
        export_report(rec, ReportFormat::Csv, dir);
        export_report(rec, ReportFormat::Json, dir);
        CHECK(count_lines(slurp(dir / "repeats.csv")) == static_cast<std::size_t>(cfg.repeats) + 1);
        const std::string summary = slurp(dir / "summary.csv");
        CHECK(summary.rfind("metric,mean,std,r0,r1,r2\n", 0) == 0);
        CHECK(count_lines(summary) == 5);
        const std::string report = slurp(dir / "report.json");
        CHECK(report.find("seconds") == std::string::npos);
        CHECK(json::parse(report) == record_to_json(rec));
        CHECK(json::parse(slurp(dir / "timings.json")).contains("iteration_seconds"));

        std::istringstream conv(slurp(dir / "convergence_r0.csv"));
        std::string line;
        std::getline(conv, line);
        CHECK(line == "iteration,f,J,residual");
        double prev = rec.repeats[0].trace.initial_objective;
        int rows = 0;
        while (std::getline(conv, line)) {
            const auto c1 = line.find(',');
            const double f = std::stod(line.substr(c1 + 1, line.find(',', c1 + 1) - c1 - 1));
            CHECK(f <= prev + 1e-8 * std::abs(prev));
            prev = f;
            ++rows;
        }
        CHECK(rows == rec.repeats[0].summary.iterations);
        CHECK_THROWS_AS(report_format_from_string("xml"), Error);
        fs::remove_all(dir);
    }

    TEST_CASE("subgradient benchmark table")
    {
        const auto rows = bench_subgradient({{200, 5}, {400, 5}}, 2, 0.0, 1);
        REQUIRE(rows.size() == 2);
        CHECK_FALSE(rows[0].oracle_seconds.has_value());
        CHECK(rows[0].gram_seconds > 0.0);
        const std::string table = bench_table_csv(rows);
        CHECK(table.rfind("n,c,gram_seconds,full_svd_seconds\n", 0) == 0);
        CHECK(table.find(",-\n") != std::string::npos);
        const auto with_oracle = bench_subgradient({{100, 4}}, 1);
        CHECK(with_oracle[0].oracle_seconds.has_value());
    }

    TEST_CASE("full-SVD subgradient agrees with the Gram route")
    {
        std::mt19937_64 gen(2);
        std::normal_distribution<double> nd;
        Matrix a(60, 7);
        for (Eigen::Index j = 0; j < a.size(); ++j) a.data()[j] = nd(gen);
        CHECK((full_svd_subgradient(a) - trace_norm_subgradient(a)).norm() < 1e-9);
    }
}
