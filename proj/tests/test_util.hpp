#ifndef EVQR_TEST_UTIL_HPP
#define EVQR_TEST_UTIL_HPP

#include <random>

#include "evqr/gaussian.hpp"
#include "evqr/measures.hpp"

namespace evqr::testutil {

inline Problem random_problem(int n, int m, int dx, int dy, double epsilon,
                              unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_real_distribution<double> wdist(0.2, 1.0);
    Matrix u(n, dy), xy(m, dx + dy);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < dy; ++k) u(i, k) = unif(rng);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < dx + dy; ++k) xy(j, k) = unif(rng);
    Vector a(n), b(m);
    for (int i = 0; i < n; ++i) a[i] = wdist(rng);
    for (int j = 0; j < m; ++j) b[j] = wdist(rng);
    a /= a.sum();
    b /= b.sum();
    return Problem(DiscreteMeasure(a, u), DiscreteMeasure(b, xy), dx, epsilon);
}

// mu uniform on {0, 1}, nu uniform on {(-1, 0), (+1, 1)}: the row-wise
// mean-zero constraint forces pi = mu (x) nu for every epsilon.
inline Problem forced_product_problem(double epsilon) {
    Matrix u(2, 1), xy(2, 2);
    u << 0.0, 1.0;
    xy << -1.0, 0.0, 1.0, 1.0;
    return Problem(DiscreteMeasure(Vector::Constant(2, 0.5), u),
                   DiscreteMeasure(Vector::Constant(2, 0.5), xy), 1, epsilon);
}

inline GaussianModel random_model(int dx, int dy, unsigned seed,
                                  double ridge = 0.5) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int d = dx + dy;
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
    const Matrix sigma = a * a.transpose() + ridge * d * Matrix::Identity(d, d);
    Vector m_y(dy);
    for (int k = 0; k < dy; ++k) m_y[k] = normal(rng);
    return GaussianModel(m_y, SymMatrix(sigma.topLeftCorner(dx, dx)),
                         sigma.topRightCorner(dx, dy),
                         SymMatrix(sigma.bottomRightCorner(dy, dy)));
}

// d_x = d_y = 1, Sigma_XX = 1, Sigma_XY = 0.6, Sigma_YY = 1.
inline GaussianModel scalar_model(double m_y = 0.0) {
    Matrix one = Matrix::Identity(1, 1);
    Matrix sxy(1, 1);
    sxy << 0.6;
    return GaussianModel(Vector::Constant(1, m_y), SymMatrix(one), sxy,
                         SymMatrix(one));
}

} // namespace evqr::testutil

#endif // EVQR_TEST_UTIL_HPP
