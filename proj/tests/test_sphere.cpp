#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "conic/sphere.hpp"

using namespace conic;

namespace {

struct NormalGen {
    std::mt19937_64 eng;
    explicit NormalGen(std::uint64_t seed) : eng(seed) {}
    double operator()() {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double a = u(eng), b = u(eng);
        if (a < 1e-300) a = 1e-300;
        return std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * M_PI * b);
    }
};

UnitVector random_unit(int d, NormalGen& gen) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = gen();
    return UnitVector(v);
}

double binom_int(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1.0);
    return v;
}

}  // namespace

TEST_CASE("harmonic space dimensions") {
    CHECK(sph_harmonic_count(2, 0) == 1);
    for (int m = 1; m <= 8; ++m) CHECK(sph_harmonic_count(2, m) == 2);
    CHECK(sph_harmonic_count(3, 2) == 5);
    // oracle: dim H_m^d = C(m+d-1, m) - C(m+d-3, m-2)
    for (int d : {2, 3, 4})
        for (int m = 0; m <= 8; ++m)
            CHECK(sph_harmonic_count(d, m) ==
                  static_cast<int>(binom_int(m + d - 1, m) - binom_int(m + d - 3, m - 2)));
    CHECK_THROWS(sph_harmonic_count(5, 1));
}

TEST_CASE("d=2 constant harmonic") {
    NormalGen gen(11);
    for (int rep = 0; rep < 5; ++rep) {
        UnitVector xi = random_unit(2, gen);
        CHECK(sph_harmonic_eval(2, 0, 1, xi) ==
              doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
    }
    UnitVector e1(Eigen::Vector2d(1.0, 0.0));
    CHECK_THROWS_AS(sph_harmonic_eval(2, 1, 3, e1), std::out_of_range);
    CHECK_THROWS_AS(sph_harmonic_eval(2, 0, 0, e1), std::out_of_range);
}

TEST_CASE("orthonormality under quadrature") {
    struct Cfg {
        int d, mmax;
    };
    for (Cfg cfg : {Cfg{2, 10}, Cfg{3, 10}, Cfg{4, 6}}) {
        SphericalQuadrature q = spherical_quadrature(cfg.d, 2 * cfg.mmax + 2);
        // flatten the basis
        std::vector<std::pair<int, int>> idx;
        for (int m = 0; m <= cfg.mmax; ++m)
            for (int l = 1; l <= sph_harmonic_count(cfg.d, m); ++l) idx.push_back({m, l});
        std::vector<std::vector<double>> vals(idx.size(), std::vector<double>(q.size()));
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t i = 0; i < q.size(); ++i)
                vals[a][i] =
                    sph_harmonic_eval(cfg.d, idx[a].first, idx[a].second, UnitVector(q.points[i]));
        for (std::size_t a = 0; a < idx.size(); ++a) {
            for (std::size_t b = a; b < idx.size(); ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < q.size(); ++i)
                    s += q.weights[i] * vals[a][i] * vals[b][i];
                CHECK(std::abs(s - (a == b ? 1.0 : 0.0)) <= 1e-10);
            }
        }
    }
}

TEST_CASE("addition formula with the surface-area factor") {
    NormalGen gen(2024);
    struct Cfg {
        int d, mmax;
        double tol;
    };
    for (Cfg cfg : {Cfg{2, 8, 1e-11}, Cfg{3, 8, 1e-9}, Cfg{4, 5, 1e-9}}) {
        const double sigma = sphere_surface_area(cfg.d);
        for (int rep = 0; rep < 20; ++rep) {
            UnitVector xi = random_unit(cfg.d, gen);
            UnitVector eta = random_unit(cfg.d, gen);
            const double u = xi.coords.dot(eta.coords);
            for (int m = 0; m <= cfg.mmax; ++m) {
                double s = 0.0;
                for (int l = 1; l <= sph_harmonic_count(cfg.d, m); ++l)
                    s += sph_harmonic_eval(cfg.d, m, l, xi) * sph_harmonic_eval(cfg.d, m, l, eta);
                CHECK(std::abs(sigma * s - zonal_kernel(cfg.d, m, u)) <= cfg.tol);
            }
        }
    }
}

TEST_CASE("rotate") {
    Eigen::VectorXd e1(3), x(3);
    e1 << 1, 0, 0;
    CHECK((rotate(RotationSpec{1, 2, 0.0}, e1) - e1).norm() == doctest::Approx(0.0));
    Eigen::VectorXd r = rotate(RotationSpec{1, 2, M_PI / 2}, e1);
    CHECK(r[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-15));
    // group law
    NormalGen gen(5);
    x << gen(), gen(), gen();
    Eigen::VectorXd a = rotate(RotationSpec{2, 3, 0.7}, rotate(RotationSpec{2, 3, 0.4}, x));
    Eigen::VectorXd b = rotate(RotationSpec{2, 3, 1.1}, x);
    CHECK((a - b).norm() <= 1e-14);
    CHECK_THROWS(rotate(RotationSpec{2, 2, 0.1}, x));
}

TEST_CASE("euler_difference") {
    auto cst = [](const Eigen::VectorXd&) { return 7.0; };
    Eigen::VectorXd x(2);
    x << std::cos(0.3), std::sin(0.3);
    CHECK(euler_difference(cst, RotationSpec{1, 2, 0.2}, 1, x) ==
          doctest::Approx(0.0).epsilon(1e-14));
    CHECK(euler_difference(cst, RotationSpec{1, 2, 0.2}, 3, x) ==
          doctest::Approx(0.0).epsilon(1e-13));

    // f = x_1 = cos(phi); forward difference of the cosine
    auto f = [](const Eigen::VectorXd& v) { return v[0]; };
    const double phi = 0.3, theta = 0.25;
    CHECK(euler_difference(f, RotationSpec{1, 2, theta}, 1, x) ==
          doctest::Approx(std::cos(phi) - std::cos(phi - theta)).epsilon(1e-13));

    // r=2 equals r=1 applied twice
    auto once = [&](const Eigen::VectorXd& v) {
        return euler_difference(f, RotationSpec{1, 2, theta}, 1, v);
    };
    CHECK(euler_difference(f, RotationSpec{1, 2, theta}, 2, x) ==
          doctest::Approx(euler_difference(once, RotationSpec{1, 2, theta}, 1, x))
              .epsilon(1e-12));
}

TEST_CASE("angular_derivative") {
    NormalGen gen(99);
    Eigen::VectorXd x(3);
    x << 0.3, -1.2, 0.8;

    auto f1 = [](const Eigen::VectorXd& v) { return v[0]; };
    CHECK(angular_derivative(f1, 1, 2, 1, x) == doctest::Approx(-x[1]).epsilon(1e-10));
    CHECK(angular_derivative(f1, 1, 3, 1, x) == doctest::Approx(-x[2]).epsilon(1e-10));

    auto cst = [](const Eigen::VectorXd&) { return -2.5; };
    CHECK(angular_derivative(cst, 1, 2, 1, x) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(angular_derivative(cst, 1, 2, 2, x) == doctest::Approx(0.0).epsilon(1e-9));

    CHECK_THROWS_AS(angular_derivative(f1, 1, 2, 3, x), capability_error);

    // difference/derivative limit: Delta_{theta}/theta -> +D_{i,j} f
    auto g = [](const Eigen::VectorXd& v) { return std::exp(v[0]) * v[1]; };
    double d1 = euler_difference(g, RotationSpec{1, 2, 1e-3}, 1, x) / 1e-3;
    double d2 = euler_difference(g, RotationSpec{1, 2, 5e-4}, 1, x) / 5e-4;
    double richardson = 2.0 * d2 - d1;
    CHECK(richardson == doctest::Approx(angular_derivative(g, 1, 2, 1, x)).epsilon(1e-5));
}

TEST_CASE("spherical quadrature basics") {
    {
        SphericalQuadrature q = spherical_quadrature(2, 4);
        CHECK(q.size() >= 5);
        for (double w : q.weights) CHECK(w == doctest::Approx(2.0 * M_PI / q.size()));
        CHECK(q.total_mass() == doctest::Approx(2.0 * M_PI).epsilon(1e-13));
    }
    {
        SphericalQuadrature q = spherical_quadrature(3, 6);
        CHECK(q.integrate([](const Eigen::VectorXd&) { return 1.0; }) ==
              doctest::Approx(4.0 * M_PI).epsilon(1e-12));
        CHECK(q.integrate([](const Eigen::VectorXd& p) { return p[0] * p[0]; }) ==
              doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-12));
    }
    {
        SphericalQuadrature q = spherical_quadrature(4, 6);
        CHECK(q.total_mass() == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-12));
        // Int xi_4^2 = sigma_4 / 4 by symmetry
        CHECK(q.integrate([](const Eigen::VectorXd& p) { return p[3] * p[3]; }) ==
              doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-12));
    }
    CHECK_THROWS(spherical_quadrature(5, 4));
}

TEST_CASE("quadrature rotation invariance") {
    for (int d : {2, 3, 4}) {
        SphericalQuadrature q = spherical_quadrature(d, 12);
        RotationSpec rot{1, d, 0.6};
        for (int m : {1, 3, 5}) {
            auto f = [&](const Eigen::VectorXd& p) {
                return sph_harmonic_eval(d, m, 1, UnitVector(p));
            };
            auto frot = [&](const Eigen::VectorXd& p) { return f(rotate(rot, p)); };
            CHECK(std::abs(q.integrate(f) - q.integrate(frot)) <= 1e-9);
        }
    }
}

TEST_CASE("harmonics are Laplace-Beltrami eigenfunctions") {
    NormalGen gen(314);
    for (int d : {2, 3}) {
        for (int m = 1; m <= 5; ++m) {
            const int L = sph_harmonic_count(d, m);
            for (int l = 1; l <= L; l += std::max(1, L - 1)) {
                auto f = [&](const Eigen::VectorXd& v) {
                    return sph_harmonic_eval(d, m, l, UnitVector(v));
                };
                for (int rep = 0; rep < 3; ++rep) {
                    UnitVector xi = random_unit(d, gen);
                    double y = f(xi.coords);
                    if (std::abs(y) < 0.05) continue;  // avoid relative checks near zeros
                    double lap = 0.0;
                    for (int i = 1; i <= d; ++i)
                        for (int j = i + 1; j <= d; ++j)
                            lap += angular_derivative(f, i, j, 2, xi.coords);
                    CHECK(lap / y == doctest::Approx(-m * (m + d - 2.0)).epsilon(1e-4));
                }
            }
        }
    }
}
