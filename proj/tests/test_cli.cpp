#include "mvml/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args, const fs::path& dir)
{
    const fs::path log = dir / "stdout.txt";
    const std::string cmd = std::string("\"") + MVML_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2> \"" +
                            (dir / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

fs::path workdir()
{
    const fs::path dir = fs::temp_directory_path() / ("mvml_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("synth, corrupt, fit, predict and evaluate chain")
    {
        const fs::path dir = workdir();
        const std::string d = (dir / "data").string();
        CHECK(run("--seed 3 --out " + d + " synth --n 200 --c 5 --dims 6 8", dir).code == 0);
        CHECK(fs::exists(dir / "data" / "manifest.json"));
        const std::string dc = (dir / "corrupted").string();
        CHECK(run("corrupt --data " + d + " --alpha 0.3 --beta 0.3 --dealign --seed 4 --out " + dc, dir).code == 0);
        const std::string fo = (dir / "fit").string();
        CHECK(run("fit --data " + dc + " --lambda 0.5 --out " + fo, dir).code == 0);
        CHECK(fs::exists(dir / "fit" / "weights.json"));
        CHECK(fs::exists(dir / "fit" / "convergence.csv"));
        const Run p = run("predict --data " + d + " --weights " + fo + "/weights.json", dir);
        CHECK(p.code == 0);
        CHECK(std::count(p.out.begin(), p.out.end(), '\n') == 200);
        const Run e = run("evaluate --data " + d + " --weights " + fo + "/weights.json", dir);
        CHECK(e.code == 0);
        const auto metrics = nlohmann::json::parse(e.out);
        CHECK(metrics.at("auc").get<double>() > 0.5);
        fs::remove_all(dir);
    }

    TEST_CASE("config-driven evaluation writes reports")
    {
        const fs::path dir = workdir();
        std::ofstream(dir / "cfg.json") << R"({
            "dataset": {"synthetic": {"n": 150, "c": 5, "dims": [5, 6], "seed": 2}},
            "corruption": {"alpha": 0.3, "beta": 0.5, "dealign": true, "seed": 3},
            "solver": {"lambda": 0.5, "max_iters": 40},
            "split": {"train_fraction": 0.7, "seed": 4},
            "repeats": 2
        })";
        const std::string cfg = (dir / "cfg.json").string();
        CHECK(run("--config " + cfg + " --out " + (dir / "a").string() + " evaluate", dir).code == 0);
        CHECK(run("--config " + cfg + " --out " + (dir / "b").string() + " evaluate", dir).code == 0);
        std::ifstream a(dir / "a" / "report.json"), b(dir / "b" / "report.json");
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        CHECK(sa.str() == sb.str());
        CHECK(run("--config " + cfg + " --format csv --out " + (dir / "c").string() + " evaluate", dir).code == 0);
        CHECK(fs::exists(dir / "c" / "summary.csv"));
        CHECK(fs::exists(dir / "c" / "convergence_r1.csv"));

        const Run ab = run("--config " + cfg + " --format csv ablate --repeats 1", dir);
        CHECK(ab.code == 0);
        CHECK(ab.out.find("loss-only,") != std::string::npos);
        CHECK(ab.out.find("loss-plus-local,") != std::string::npos);
        const Run sw = run("--config " + cfg + " --format csv sweep-lambda --repeats 1 --grid 0.1 1", dir);
        CHECK(sw.code == 0);
        CHECK(sw.out.find("lambda=0.1,") != std::string::npos);
        CHECK(run("--config " + cfg + " study-mu --repeats 1 --grid 1 5", dir).code == 0);
        const Run rk = run("--config " + cfg + " rank-diag", dir);
        CHECK(rk.code == 0);
        CHECK(nlohmann::json::parse(rk.out).at("entire_rank").get<int>() == 5);
        fs::remove_all(dir);
    }

    TEST_CASE("benchmark marks skipped oracles")
    {
        const fs::path dir = workdir();
        const Run r = run("--format csv bench-subgrad --sizes 300:5 600:5 --repeats 1 --oracle-guard-bytes 1000000", dir);
        CHECK(r.code == 0);
        CHECK(r.out.find("300,5,") != std::string::npos);
        CHECK(r.out.find(",-\n") != std::string::npos);
        fs::remove_all(dir);
    }

    TEST_CASE("exit codes")
    {
        const fs::path dir = workdir();
        CHECK(run("fit --data " + (dir / "none").string() + " --out " + (dir / "x").string(), dir).code == 1);
        CHECK(run("evaluate --lambda -1 --repeats 1", dir).code == 1);
        CHECK(run("--format xml bench-subgrad", dir).code == 1);
        CHECK(run("no-such-command", dir).code == 1);
        CHECK(run("synth --n 10 --c 3", dir).code == 1); // --out missing
        CHECK(run("--help", dir).code == 0);

        // finite features whose Gram matrix overflows: a numerical failure
        fs::copy(MVML_FIXTURE_DIR "/toy3", dir / "huge", fs::copy_options::recursive);
        std::ofstream(dir / "huge" / "shape.csv")
            << "1e200,0\n0,1e200\n1e200,1e200\n2e200,0\n0,2e200\n1e200,2e200\n2e200,1e200\n2e200,2e200\n";
        CHECK(run("fit --data " + (dir / "huge").string() + " --out " + (dir / "y").string(), dir).code == 2);
        fs::remove_all(dir);
    }
}
