#include <doctest.h>

#include <cmath>
#include <random>

#include "evqr/linalg.hpp"

using namespace evqr;

namespace {

Matrix random_spd(int d, std::mt19937_64& rng, double ridge = 0.5) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
    return a * a.transpose() + ridge * d * Matrix::Identity(d, d);
}

} // namespace

TEST_CASE("SymMatrix symmetrizes and rejects asymmetry") {
    Matrix a(2, 2);
    a << 1.0, 2.0, 2.0 + 1e-14, 3.0;
    const SymMatrix s(a);
    CHECK(s.mat()(0, 1) == s.mat()(1, 0));

    Matrix bad(2, 2);
    bad << 1.0, 2.0, 2.5, 3.0;
    CHECK_THROWS_AS(SymMatrix{bad}, DomainError);
}

TEST_CASE("psd_sqrt basics") {
    CHECK((psd_sqrt(SymMatrix(Matrix::Identity(3, 3))).mat() -
           Matrix::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() <= 1e-14);

    Matrix d(2, 2);
    d << 4.0, 0.0, 0.0, 9.0;
    const Matrix s = psd_sqrt(SymMatrix(d)).mat();
    CHECK(s(0, 0) == doctest::Approx(2.0));
    CHECK(s(1, 1) == doctest::Approx(3.0));
    CHECK(std::abs(s(0, 1)) <= 1e-14);

    Matrix a(2, 2);
    a << 2.0, 1.0, 1.0, 2.0;
    const Matrix r = psd_sqrt(SymMatrix(a)).mat();
    CHECK((r * r - a).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("psd_sqrt rejects indefinite input") {
    Matrix a(2, 2);
    a << 1.0, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(psd_sqrt(SymMatrix(a)), NotPSD);
}

TEST_CASE("psd_sqrt roundtrip on random SPD up to d = 12") {
    std::mt19937_64 rng(321);
    for (int d = 1; d <= 12; ++d) {
        const Matrix a = random_spd(d, rng);
        const Matrix s = psd_sqrt(SymMatrix(a)).mat();
        CHECK((s * s - a).norm() <= 1e-10 * a.norm());
    }
}

TEST_CASE("sym_solve") {
    SUBCASE("identity") {
        Matrix b(3, 2);
        b << 1, 2, 3, 4, 5, 6;
        CHECK((sym_solve(SymMatrix(Matrix::Identity(3, 3)), b) - b)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
    SUBCASE("diagonal") {
        Matrix a(2, 2);
        a << 2.0, 0.0, 0.0, 4.0;
        Matrix b(2, 1);
        b << 2.0, 4.0;
        const Matrix x = sym_solve(SymMatrix(a), b);
        CHECK(x(0, 0) == doctest::Approx(1.0));
        CHECK(x(1, 0) == doctest::Approx(1.0));
    }
    SUBCASE("construct-then-solve roundtrip") {
        std::mt19937_64 rng(99);
        const Matrix a = random_spd(6, rng);
        std::normal_distribution<double> normal;
        Matrix x0(6, 3);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 3; ++j) x0(i, j) = normal(rng);
        const Matrix b = a * x0;
        CHECK((sym_solve(SymMatrix(a), b) - x0).norm() <= 1e-10 * x0.norm());
    }
    SUBCASE("singular input throws") {
        Matrix a = Matrix::Zero(2, 2);
        a(0, 0) = 1.0;
        CHECK_THROWS_AS(sym_solve(SymMatrix(a), Matrix::Identity(2, 2)),
                        SingularMatrix);
    }
}

TEST_CASE("bures_w2_squared values") {
    Matrix a1(1, 1), b1(1, 1);
    a1 << 1.0;
    b1 << 4.0;
    // 1 + 4 - 2*2 = 1
    CHECK(bures_w2_squared(SymMatrix(a1), SymMatrix(b1)) ==
          doctest::Approx(1.0));

    std::mt19937_64 rng(5);
    const Matrix a = random_spd(4, rng);
    CHECK(bures_w2_squared(SymMatrix(a), SymMatrix(a)) <= 1e-10);

    // singular PSD input
    Matrix v(3, 2);
    v << 1, 0, 0, 1, 1, 1;
    const Matrix sing = v * v.transpose();
    CHECK(bures_w2_squared(SymMatrix(sing), SymMatrix(sing)) <= 1e-10);
}

TEST_CASE("bures_w2_squared symmetry and nonnegativity") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 6);
        const SymMatrix a(random_spd(d, rng));
        const SymMatrix b(random_spd(d, rng));
        const double ab = bures_w2_squared(a, b);
        const double ba = bures_w2_squared(b, a);
        CHECK(ab >= 0.0);
        CHECK(std::abs(ab - ba) <= 1e-10 * (1.0 + std::abs(ab)));
    }
}

TEST_CASE("bures distance triangle inequality spot checks") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 4);
        const SymMatrix a(random_spd(d, rng));
        const SymMatrix b(random_spd(d, rng));
        const SymMatrix c(random_spd(d, rng));
        const double dab = std::sqrt(bures_w2_squared(a, b));
        const double dbc = std::sqrt(bures_w2_squared(b, c));
        const double dac = std::sqrt(bures_w2_squared(a, c));
        CHECK(dac <= dab + dbc + 1e-10);
    }
}
