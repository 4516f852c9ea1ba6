#include <doctest.h>

#include <cmath>

#include "evqr/measures.hpp"

using namespace evqr;

namespace {

DiscreteMeasure measure1d(std::initializer_list<double> w,
                          std::initializer_list<double> x) {
    Vector wv(static_cast<Eigen::Index>(w.size()));
    Matrix xv(static_cast<Eigen::Index>(x.size()), 1);
    Eigen::Index i = 0;
    for (double v : w) wv[i++] = v;
    i = 0;
    for (double v : x) xv(i++, 0) = v;
    return DiscreteMeasure(wv, xv);
}

} // namespace

TEST_CASE("cost_matrix squared-distance entries") {
    const auto mu = measure1d({0.5, 0.5}, {0.0, 1.0});
    const auto nu = measure1d({0.5, 0.5}, {0.0, 2.0});
    const Matrix c = cost_matrix(mu, nu);
    CHECK(c(0, 0) == 0.0);
    CHECK(c(0, 1) == 2.0);
    CHECK(c(1, 0) == 0.5);
    CHECK(c(1, 1) == 0.5);
}

TEST_CASE("cost_matrix zero diagonal on identical grids") {
    const auto mu = measure1d({0.25, 0.25, 0.5}, {-1.0, 0.3, 2.0});
    const Matrix c = cost_matrix(mu, mu);
    for (int i = 0; i < 3; ++i) CHECK(c(i, i) == 0.0);
}

TEST_CASE("cost_matrix multi-dimensional") {
    Matrix u(1, 2), y(1, 2);
    u << 1.0, 0.0;
    y << 0.0, 1.0;
    const DiscreteMeasure mu(Vector::Ones(1), u);
    const DiscreteMeasure nu(Vector::Ones(1), y);
    CHECK(cost_matrix(mu, nu)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("cost_matrix symmetric under role swap") {
    Matrix u(3, 2), y(4, 2), x(4, 1), x2(3, 1);
    u << 0.1, -0.2, 1.0, 0.5, -0.3, 0.7;
    y << 0.0, 0.0, 0.5, -0.5, 1.2, 0.3, -0.9, 0.1;
    x.setZero();
    x2.setZero();
    Matrix xy(4, 3), xu(3, 3);
    xy << x, y;
    xu << x2, u;
    const DiscreteMeasure mu_u(Vector::Constant(3, 1.0 / 3), u);
    const DiscreteMeasure nu_y(Vector::Constant(4, 0.25), xy);
    const DiscreteMeasure mu_y(Vector::Constant(4, 0.25), y);
    const DiscreteMeasure nu_u(Vector::Constant(3, 1.0 / 3), xu);
    const Matrix c1 = cost_matrix(mu_u, nu_y);
    const Matrix c2 = cost_matrix(mu_y, nu_u);
    CHECK((c1 - c2.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("center_covariates subtracts the weighted mean") {
    SUBCASE("equal weights") {
        const auto nu = measure1d({0.5, 0.5}, {1.0, 3.0});
        auto [centered, shift] = center_covariates(nu, 1);
        CHECK(shift[0] == doctest::Approx(2.0));
        CHECK(centered.points()(0, 0) == doctest::Approx(-1.0));
        CHECK(centered.points()(1, 0) == doctest::Approx(1.0));
    }
    SUBCASE("already centered is the identity") {
        const auto nu = measure1d({0.5, 0.5}, {-1.0, 1.0});
        auto [centered, shift] = center_covariates(nu, 1);
        CHECK(shift[0] == 0.0);
        CHECK((centered.points() - nu.points()).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("weighted mean") {
        const auto nu = measure1d({0.25, 0.75}, {0.0, 4.0});
        auto [centered, shift] = center_covariates(nu, 1);
        CHECK(shift[0] == doctest::Approx(3.0));
        CHECK(centered.points()(0, 0) == doctest::Approx(-3.0));
        CHECK(centered.points()(1, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("center_covariates is idempotent with additive shifts") {
    Vector w(3);
    w << 0.2, 0.5, 0.3;
    Matrix pts(3, 3);
    pts << 1.0, -2.0, 0.1, 4.0, 1.0, -0.5, -2.0, 3.0, 0.9;
    const DiscreteMeasure nu(w, pts);
    auto [c1, s1] = center_covariates(nu, 2);
    auto [c2, s2] = center_covariates(c1, 2);
    CHECK(s2.norm() <= 1e-15);
    CHECK((c1.points() - c2.points()).cwiseAbs().maxCoeff() <= 1e-15);

    // translating the covariates by t adds t to the shift
    Vector t(2);
    t << 0.7, -1.3;
    Matrix translated = pts;
    translated.leftCols(2).rowwise() += t.transpose();
    auto [c3, s3] = center_covariates(DiscreteMeasure(w, translated), 2);
    CHECK((s3 - (s1 + t)).norm() <= 1e-14);
    CHECK((c3.points() - c1.points()).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("validate_problem feasibility") {
    SUBCASE("symmetric support is feasible") {
        const auto mu = measure1d({0.5, 0.5}, {0.0, 1.0});
        Matrix xy(2, 2);
        xy << -1.0, 0.0, 1.0, 1.0;
        const DiscreteMeasure nu(Vector::Constant(2, 0.5), xy);
        const Problem p(mu, nu, 1, 1.0);
        const auto rep = validate_problem(p);
        CHECK(rep.feasible);
        CHECK(rep.x_second_moment_min_eig == doctest::Approx(1.0));
        CHECK(rep.x_mean_norm <= 1e-14);
    }
    SUBCASE("all-zero covariates are infeasible") {
        const auto mu = measure1d({0.5, 0.5}, {0.0, 1.0});
        Matrix xy(2, 2);
        xy << 0.0, 0.0, 0.0, 1.0;
        const DiscreteMeasure nu(Vector::Constant(2, 0.5), xy);
        const Problem p(mu, nu, 1, 1.0);
        const auto rep = validate_problem(p);
        CHECK_FALSE(rep.feasible);
        CHECK(!rep.messages.empty());
    }
    SUBCASE("rank-deficient covariates in d_x = 2") {
        const auto mu = measure1d({0.5, 0.5}, {0.0, 1.0});
        Matrix xy(2, 3);
        xy << 1.0, 0.0, 0.0, -1.0, 0.0, 1.0;
        const DiscreteMeasure nu(Vector::Constant(2, 0.5), xy);
        const Problem p(mu, nu, 2, 1.0);
        CHECK_FALSE(validate_problem(p).feasible);
    }
}

TEST_CASE("validate_problem is permutation invariant") {
    Vector w(3);
    w << 0.2, 0.5, 0.3;
    Matrix xy(3, 2);
    xy << -1.0, 0.0, 0.5, 1.0, 0.4, -0.7;
    const auto mu = measure1d({0.5, 0.5}, {0.0, 1.0});
    const Problem p1(mu, DiscreteMeasure(w, xy), 1, 1.0);

    Vector wp(3);
    wp << 0.3, 0.2, 0.5;
    Matrix xyp(3, 2);
    xyp << 0.4, -0.7, -1.0, 0.0, 0.5, 1.0;
    const Problem p2(mu, DiscreteMeasure(wp, xyp), 1, 1.0);

    const auto r1 = validate_problem(p1);
    const auto r2 = validate_problem(p2);
    CHECK(r1.feasible == r2.feasible);
    CHECK(r1.x_second_moment_min_eig ==
          doctest::Approx(r2.x_second_moment_min_eig).epsilon(1e-12));
}

TEST_CASE("DiscreteMeasure validation") {
    SUBCASE("zero-weight atoms are dropped") {
        Vector w(3);
        w << 0.5, 0.0, 0.5;
        Matrix x(3, 1);
        x << 1.0, 2.0, 3.0;
        const DiscreteMeasure m(w, x);
        CHECK(m.size() == 2);
        CHECK(m.points()(1, 0) == 3.0);
    }
    SUBCASE("weights must sum to one") {
        Vector w(2);
        w << 0.5, 0.6;
        CHECK_THROWS_AS(DiscreteMeasure(w, Matrix::Zero(2, 1)), DomainError);
    }
    SUBCASE("negative weights rejected") {
        Vector w(2);
        w << -0.1, 1.1;
        CHECK_THROWS_AS(DiscreteMeasure(w, Matrix::Zero(2, 1)), DomainError);
    }
    SUBCASE("non-finite points rejected") {
        Vector w = Vector::Constant(1, 1.0);
        Matrix x(1, 1);
        x << std::nan("");
        CHECK_THROWS_AS(DiscreteMeasure(w, x), DomainError);
    }
}

TEST_CASE("Problem construction") {
    const auto mu = measure1d({0.5, 0.5}, {0.0, 1.0});
    Matrix xy(2, 2);
    xy << 3.0, 0.0, 5.0, 1.0;
    const DiscreteMeasure nu(Vector::Constant(2, 0.5), xy);

    SUBCASE("covariates are centered and the shift recorded") {
        const Problem p(mu, nu, 1, 0.5);
        CHECK(p.centering_shift()[0] == doctest::Approx(4.0));
        CHECK((p.covariates().transpose() * p.nu().weights()).norm() <= 1e-12);
        CHECK(p.dim_y() == 1);
        CHECK(p.dim_x() == 1);
    }
    SUBCASE("epsilon must be positive") {
        CHECK_THROWS_AS(Problem(mu, nu, 1, 0.0), DomainError);
        CHECK_THROWS_AS(Problem(mu, nu, 1, -1.0), DomainError);
    }
    SUBCASE("dimension mismatch is rejected") {
        CHECK_THROWS_AS(Problem(mu, nu, 0, 1.0), DimensionMismatch);
    }
}
