#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "evqr/io.hpp"
#include "test_util.hpp"

using namespace evqr;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("evqr_io_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

} // namespace

TEST_CASE("mu CSV round trip") {
    TempDir dir;
    Matrix u(3, 2);
    u << 0.1, -0.25, 1.0 / 3.0, 2.0, -1e-7, 5.5;
    Vector w(3);
    w << 0.25, 0.5, 0.25;
    const DiscreteMeasure mu(w, u);
    write_mu_csv(dir.file("mu.csv"), mu);
    const DiscreteMeasure back = load_mu_csv(dir.file("mu.csv"));
    CHECK(back.dim() == 2);
    CHECK((back.weights() - mu.weights()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.points() - mu.points()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nu CSV round trip infers d_x from the header") {
    TempDir dir;
    Matrix xy(2, 3);
    xy << -0.5, 0.125, 0.7, 0.5, -0.125, 1.3;
    const DiscreteMeasure nu(Vector::Constant(2, 0.5), xy);
    write_nu_csv(dir.file("nu.csv"), nu, 2);
    auto [back, dx] = load_nu_csv(dir.file("nu.csv"));
    CHECK(dx == 2);
    CHECK((back.points() - nu.points()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("CSV parse errors carry the line number") {
    TempDir dir;
    SUBCASE("bad number") {
        write_text(dir.file("mu.csv"), "w,u1\n0.5,0.0\n0.5,zzz\n");
        try {
            load_mu_csv(dir.file("mu.csv"));
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find(":3:") != std::string::npos);
        }
    }
    SUBCASE("wrong field count") {
        write_text(dir.file("mu.csv"), "w,u1\n0.5,0.0,9.9\n");
        try {
            load_mu_csv(dir.file("mu.csv"));
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find(":2:") != std::string::npos);
        }
    }
    SUBCASE("bad header") {
        write_text(dir.file("mu.csv"), "weight,u1\n1.0,0.0\n");
        CHECK_THROWS_AS(load_mu_csv(dir.file("mu.csv")), ParseError);
        write_text(dir.file("nu.csv"), "w,x1,z1\n1.0,0.0,0.0\n");
        CHECK_THROWS_AS(load_nu_csv(dir.file("nu.csv")), ParseError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_mu_csv(dir.file("absent.csv")), ParseError);
    }
}

TEST_CASE("coupling CSV round trips at full precision") {
    TempDir dir;
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix pi(4, 6);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 6; ++j) pi(i, j) = unif(rng) * 1e-3;
    write_coupling_csv(dir.file("pi.csv"), pi);
    const Matrix back = load_coupling_csv(dir.file("pi.csv"));
    REQUIRE(back.rows() == 4);
    REQUIRE(back.cols() == 6);
    CHECK((back - pi).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("potentials CSV writes f,g and h tables") {
    TempDir dir;
    Potentials pots;
    pots.f = Vector::LinSpaced(3, -1.0, 1.0);
    pots.g = Matrix::Random(3, 2);
    pots.h = Vector::LinSpaced(4, 0.0, 0.3);
    write_potentials_csv(dir.file("pots.csv"), dir.file("pots_h.csv"), pots);
    std::ifstream fg(dir.file("pots.csv"));
    std::string header;
    std::getline(fg, header);
    CHECK(header == "f,g1,g2");
    std::ifstream h(dir.file("pots_h.csv"));
    std::getline(h, header);
    CHECK(header == "h");
    int rows = 0;
    std::string line;
    while (std::getline(h, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("gaussian model JSON round trip") {
    TempDir dir;
    const GaussianModel model = testutil::random_model(2, 3, 404);
    write_gaussian_model(dir.file("model.json"), model);
    const GaussianModel back = load_gaussian_model(dir.file("model.json"));
    CHECK((back.sigma() - model.sigma()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((back.m_y() - model.m_y()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("gaussian model JSON rejects malformed input") {
    TempDir dir;
    write_text(dir.file("bad.json"), "{\"m_y\": [0.0], \"sigma_xx\": 3}");
    CHECK_THROWS_AS(load_gaussian_model(dir.file("bad.json")), ParseError);
    write_text(dir.file("notjson.json"), "not json at all");
    CHECK_THROWS_AS(load_gaussian_model(dir.file("notjson.json")), ParseError);
}

TEST_CASE("non-PD model propagates NotPSD, not ParseError") {
    TempDir dir;
    write_text(dir.file("npd.json"),
               R"({"m_y": [0.0], "sigma_xx": [[1.0]],
                   "sigma_xy": [[2.0]], "sigma_yy": [[1.0]]})");
    CHECK_THROWS_AS(load_gaussian_model(dir.file("npd.json")), NotPSD);
}

TEST_CASE("sweep CSV layout") {
    TempDir dir;
    std::vector<SweepRow> rows(2);
    rows[0] = {1e-1, 0.039, 0.04, 0.975, -0.09};
    rows[1] = {1e-2, 0.00399, 0.004, 0.998, -0.09};
    write_sweep_csv(dir.file("sweep.csv"), rows);
    std::ifstream in(dir.file("sweep.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "epsilon,w2_exact,first_order,ratio,residual_over_eps2");
    int data_rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++data_rows;
    CHECK(data_rows == 2);
}

TEST_CASE("format_double round trips doubles exactly") {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double v = unif(rng) * std::pow(10.0, int(rng() % 20) - 10);
        CHECK(std::stod(format_double(v)) == v);
    }
}
