#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cornet/dataset.hpp"
#include "cornet/rng.hpp"

using namespace cornet;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() / ("cornet_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("load_csv parses a 2-row single-covariate file") {
    TempDir dir;
    write_text(dir.file("a.csv"), "x1,t,y\n0.5,1,2.0\n-0.5,0,1.0\n");
    const TreatmentDataset ds = load_csv(dir.file("a.csv"));
    CHECK(ds.n() == 2);
    CHECK(ds.dim() == 1);
    CHECK(ds.x(0, 0) == 0.5);
    CHECK(ds.t[0] == 1);
    CHECK(ds.y[1] == 1.0);
}

TEST_CASE("csv round trip is lossless") {
    TempDir dir;
    Rng rng = make_rng(3);
    TreatmentDataset ds;
    ds.x = draw_gaussian_matrix(rng, 40, 5);
    ds.t.resize(40);
    ds.y.resize(40);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < 40; ++i) {
        ds.t[i] = coin(rng) ? 1 : 0;
        ds.y[i] = draw_gaussian(rng) * 1e3;
    }
    write_csv(ds, dir.file("rt.csv"));
    const TreatmentDataset back = load_csv(dir.file("rt.csv"));
    REQUIRE(back.n() == ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) CHECK(std::abs(back.x(i, j) - ds.x(i, j)) < 1e-12);
        CHECK(back.t[i] == ds.t[i]);
        CHECK(std::abs(back.y[i] - ds.y[i]) < 1e-12 * std::max(1.0, std::abs(ds.y[i])));
    }
}

TEST_CASE("t outside {0,1} is a parse error naming the row") {
    TempDir dir;
    write_text(dir.file("bad_t.csv"), "x1,t,y\n0.5,2,2.0\n");
    try {
        (void)load_csv(dir.file("bad_t.csv"));
        FAIL("expected parse error");
    } catch (const parse_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("column t") != std::string::npos);
    }
}

TEST_CASE("non-numeric cell is a parse error naming row and column") {
    TempDir dir;
    write_text(dir.file("bad_cell.csv"), "x1,x2,t,y\n0.5,oops,1,2.0\n");
    try {
        (void)load_csv(dir.file("bad_cell.csv"));
        FAIL("expected parse error");
    } catch (const parse_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("x2") != std::string::npos);
    }
}

TEST_CASE("missing/misnamed column is a parse error") {
    TempDir dir;
    write_text(dir.file("bad_header.csv"), "x1,y\n0.5,2.0\n");
    CHECK_THROWS_AS((void)load_csv(dir.file("bad_header.csv")), parse_error);
    write_text(dir.file("bad_header2.csv"), "x1,x3,t,y\n0.5,1.0,1,2.0\n");
    CHECK_THROWS_AS((void)load_csv(dir.file("bad_header2.csv")), parse_error);
}

TEST_CASE("meta sidecar round trip") {
    TempDir dir;
    const std::vector<std::pair<std::string, std::string>> meta = {
        {"scenario", "shared_rep"}, {"seed", "42"}, {"beta", "1.5"}};
    write_meta(dir.file("meta.txt"), meta);
    CHECK(read_meta(dir.file("meta.txt")) == meta);
}

TEST_CASE("tau csv round trip") {
    TempDir dir;
    Rng rng = make_rng(4);
    Matrix x = draw_gaussian_matrix(rng, 10, 3);
    Vec tau(10);
    for (double& v : tau) v = draw_gaussian(rng);
    write_tau_csv(x, tau, dir.file("t.csv"));
    Matrix xb;
    Vec tb;
    load_tau_csv(dir.file("t.csv"), xb, tb);
    REQUIRE(xb.rows == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(tb[i] - tau[i]) < 1e-12);
}
