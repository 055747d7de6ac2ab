#include "mvml/error.hpp"
#include "mvml/io.hpp"
#include "mvml/masking.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

namespace fs = std::filesystem;
using namespace mvml;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("mvml_io_" + name + "_" + std::to_string(std::random_device{}()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path copy_fixture(const std::string& name)
{
    const fs::path dir = scratch_dir(name);
    fs::copy(MVML_FIXTURE_DIR "/toy3", dir, fs::copy_options::recursive);
    return dir;
}

void overwrite(const fs::path& file, const std::string& text)
{
    std::ofstream(file, std::ios::binary) << text;
}

ErrorKind kind_of(const fs::path& dir)
{
    try {
        (void)load_dataset(dir);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("load_dataset succeeded unexpectedly");
    return ErrorKind::InvalidInput;
}

} // namespace

TEST_SUITE("io")
{
    TEST_CASE("toy fixture loads with known checksums")
    {
        const MultiViewDataset ds = load_dataset(MVML_FIXTURE_DIR "/toy3");
        CHECK(ds.n() == 8);
        CHECK(ds.c() == 3);
        CHECK(ds.num_views() == 3);
        CHECK(ds.aligned());
        CHECK(ds.dims() == std::vector<Eigen::Index>{2, 3, 2});
        CHECK(ds.view(0).features.sum() == 18.0);
        CHECK(ds.view(1).features.sum() == 17.5);
        CHECK(ds.view(2).features.sum() == 1.0);
        CHECK(ds.view(2).features(4, 1) == -0.5);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK((ds.view(i).labels.array() > 0).count() == 12);
            CHECK(ds.view(i).labels.sum() == 0.0);
        }
    }

    TEST_CASE("dimension mismatch names the view")
    {
        const fs::path dir = copy_fixture("dim");
        std::ifstream in(dir / "manifest.json");
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        text.replace(text.find("\"dim\": 3"), 8, "\"dim\": 4");
        overwrite(dir / "manifest.json", text);
        try {
            (void)load_dataset(dir);
            FAIL("expected SchemaViolation");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::SchemaViolation);
            CHECK(std::string(e.what()).find("colour") != std::string::npos);
        }
        fs::remove_all(dir);
    }

    TEST_CASE("label out of domain")
    {
        const fs::path dir = copy_fixture("label");
        overwrite(dir / "labels.csv", "1,-1,-1\n-1,1,-1\n1,2,-1\n-1,-1,1\n1,-1,1\n-1,1,1\n1,1,1\n-1,-1,-1\n");
        CHECK(kind_of(dir) == ErrorKind::LabelDomainViolation);
        overwrite(dir / "labels.csv", "1,-1,-1\n-1,1,-1\n1,0.5,-1\n-1,-1,1\n1,-1,1\n-1,1,1\n1,1,1\n-1,-1,-1\n");
        CHECK(kind_of(dir) == ErrorKind::LabelDomainViolation);
        fs::remove_all(dir);
    }

    TEST_CASE("non-finite, malformed and missing inputs")
    {
        const fs::path dir = copy_fixture("bad");
        overwrite(dir / "shape.csv", "1,0\n0,1\n1,nan\n2,0\n0,2\n1,2\n2,1\n2,2\n");
        CHECK(kind_of(dir) == ErrorKind::NonFiniteEntry);
        overwrite(dir / "shape.csv", "1,0\n0,1\n1,x\n2,0\n0,2\n1,2\n2,1\n2,2\n");
        CHECK(kind_of(dir) == ErrorKind::SchemaViolation);
        overwrite(dir / "shape.csv", "1,0\n0,1\n");
        CHECK(kind_of(dir) == ErrorKind::SchemaViolation);
        fs::remove(dir / "shape.csv");
        CHECK(kind_of(dir) == ErrorKind::MissingFile);
        CHECK(kind_of(dir / "nowhere") == ErrorKind::MissingFile);
        overwrite(dir / "manifest.json", "{not json");
        CHECK(kind_of(dir) == ErrorKind::SchemaViolation);
        fs::remove_all(dir);
    }

    TEST_CASE("missing flag with nonzero row is rejected")
    {
        const fs::path dir = copy_fixture("flag");
        overwrite(dir / "texture_missing.txt", "0\n1\n0\n0\n0\n0\n0\n0\n");
        CHECK(kind_of(dir) == ErrorKind::SchemaViolation);
        fs::remove_all(dir);
    }

    TEST_CASE("dataset save and load round trip")
    {
        SyntheticSpec s;
        s.n = 40;
        s.c = 4;
        s.dims = {3, 5};
        s.seed = 2;
        const MultiViewDataset ds = corrupt(generate_synthetic(s), CorruptionSpec{0.3, 0.5, true, 3});
        const fs::path dir = scratch_dir("roundtrip");
        save_dataset(ds, dir);
        const MultiViewDataset back = load_dataset(dir);
        CHECK(back.aligned() == ds.aligned());
        for (std::size_t i = 0; i < ds.num_views(); ++i) {
            CHECK(back.view(i).features == ds.view(i).features);
            CHECK(back.view(i).labels == ds.view(i).labels);
            CHECK(back.view(i).missing == ds.view(i).missing);
        }
        fs::remove_all(dir);
    }

    TEST_CASE("weights round trip bit for bit")
    {
        std::mt19937_64 gen(5);
        std::normal_distribution<double> nd;
        WeightStack w{{Matrix(3, 2), Matrix(4, 2)}};
        for (Matrix& m : w.weights) m = m.unaryExpr([&](double) { return nd(gen) * 1e-3; });
        const fs::path dir = scratch_dir("weights");
        save_weights(w, dir / "w.json");
        const WeightStack back = load_weights(dir / "w.json");
        REQUIRE(back.num_views() == 2);
        CHECK(back.weights[0] == w.weights[0]);
        CHECK(back.weights[1] == w.weights[1]);
        overwrite(dir / "w.json", "{\"format\": \"other\"}");
        CHECK_THROWS_AS(load_weights(dir / "w.json"), Error);
        fs::remove_all(dir);
    }

    TEST_CASE("shortest round-trip formatting")
    {
        for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678, 0.0}) {
            CHECK(std::stod(format_double(x)) == x);
        }
        CHECK(format_double(0.5) == "0.5");
        Matrix m(2, 2);
        m << 1, 0.25, -3, 4;
        CHECK(matrix_to_csv(m) == "1,0.25\n-3,4\n");
    }
}
