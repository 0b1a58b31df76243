#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "conic/jacobi.hpp"

using namespace conic;

namespace {

// Independent oracle: the explicit hypergeometric form
// P_n(t) = (a+1)_n / n! * 2F1(-n, n+a+b+1; a+1; (1-t)/2), truncated at n terms
// (the series terminates because -n is a negative integer).
// For t < 0 the alternating series cancels catastrophically (terms up to ~1e9
// summing to O(1)), so we route through P_n^{(a,b)}(t) = (-1)^n P_n^{(b,a)}(-t)
// to keep the argument (1-t)/2 small; long double handles the rest.
double jacobi_hypergeometric(double a, double b, int n, double t) {
    if (t < 0.0) {
        double v = jacobi_hypergeometric(b, a, n, -t);
        return (n % 2) ? -v : v;
    }
    const long double x = 0.5L * (1.0L - static_cast<long double>(t));
    long double term = 1.0L, sum = 1.0L;
    for (int k = 0; k < n; ++k) {
        term *= (-n + k) * (n + a + b + 1.0L + k) / ((a + 1.0L + k) * (k + 1.0L)) * x;
        sum += term;
    }
    long double lead = 1.0L;
    for (int k = 0; k < n; ++k) lead *= (a + 1.0L + k) / (k + 1.0L);
    return static_cast<double>(lead * sum);
}

// Gegenbauer C_n^lambda by its own recurrence (independent of jacobi_eval).
double gegenbauer(double lambda, int n, double t) {
    if (n == 0) return 1.0;
    double cm2 = 1.0, cm1 = 2.0 * lambda * t;
    if (n == 1) return cm1;
    for (int k = 2; k <= n; ++k) {
        double ck = (2.0 * t * (k + lambda - 1.0) * cm1 - (k + 2.0 * lambda - 2.0) * cm2) / k;
        cm2 = cm1;
        cm1 = ck;
    }
    return cm1;
}

}  // namespace

TEST_CASE("jacobi_eval basics") {
    JacobiParams leg(0.0, 0.0);
    CHECK(jacobi_eval(leg, 0, 0.3) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(jacobi_eval(leg, 1, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(jacobi_eval(JacobiParams(1.0, 0.0), 2, 1.0) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK_THROWS_AS(JacobiParams(-1.0, 0.0), parameter_domain_error);
    CHECK_THROWS_AS(JacobiParams(0.0, -1.5), parameter_domain_error);
}

TEST_CASE("recurrence agrees with hypergeometric oracle") {
    const double params[][2] = {{-0.5, -0.5}, {0.0, 0.0}, {1.0, 0.0}, {2.5, 0.7}};
    const double ts[] = {-0.9, 0.0, 0.6, 1.0};
    for (auto& ab : params) {
        JacobiParams p(ab[0], ab[1]);
        for (int n = 0; n <= 15; ++n) {
            for (double t : ts) {
                double ref = jacobi_hypergeometric(ab[0], ab[1], n, t);
                double got = jacobi_eval(p, n, t);
                CHECK(std::abs(got - ref) <= 1e-9 * std::abs(ref) + 1e-12);
            }
        }
    }
}

TEST_CASE("endpoint identity P_n(1) = (alpha+1)_n / n!") {
    const double params[][2] = {{-0.5, -0.5}, {0.0, 0.0}, {1.0, 0.0}, {2.5, 0.7}};
    for (auto& ab : params) {
        JacobiParams p(ab[0], ab[1]);
        for (int n = 0; n <= 30; ++n) {
            double ref = pochhammer(ab[0] + 1.0, n) / pochhammer(1.0, n);
            CHECK(jacobi_eval(p, n, 1.0) == doctest::Approx(ref).epsilon(1e-12));
            CHECK(jacobi_at_one(p, n) == doctest::Approx(ref).epsilon(1e-14));
        }
    }
}

TEST_CASE("symmetry P_n^{(a,b)}(-t) = (-1)^n P_n^{(b,a)}(t)") {
    JacobiParams p(1.25, 0.3), q(0.3, 1.25);
    for (int n = 0; n <= 12; ++n) {
        for (double t : {-0.8, -0.1, 0.4, 0.95}) {
            double lhs = jacobi_eval(p, n, -t);
            double rhs = ((n % 2) ? -1.0 : 1.0) * jacobi_eval(q, n, t);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("jacobi_norm closed form") {
    CHECK(jacobi_norm(JacobiParams(0.0, 0.0), 0) == 1.0);
    CHECK(jacobi_norm(JacobiParams(-0.5, -0.5), 0) == 1.0);
    CHECK(jacobi_norm(JacobiParams(2.5, 0.7), 0) == 1.0);
    CHECK(jacobi_norm(JacobiParams(0.0, 0.0), 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    // quadrature oracle: h_n = c'_{a,b} Int P_n^2 w_{a,b}, 64-node rule
    const double params[][2] = {{-0.5, -0.5}, {0.0, 0.0}, {1.0, 0.0}, {2.5, 0.7}};
    for (auto& ab : params) {
        JacobiParams p(ab[0], ab[1]);
        QuadratureRule rule = gauss_jacobi_rule(p, 64);
        for (int n : {1, 2, 5, 11, 20}) {
            double q = rule.integrate([&](double t) {
                           double v = jacobi_eval(p, n, t);
                           return v * v;
                       }) /
                       rule.total_mass;
            CHECK(jacobi_norm(p, n) == doctest::Approx(q).epsilon(1e-11));
        }
    }
}

TEST_CASE("zn_kernel") {
    CHECK(zn_kernel(JacobiParams(0.3, 1.7), 0, 0.123) == doctest::Approx(1.0).epsilon(1e-15));
    {
        JacobiParams p(0.5, 0.5);
        double p1 = jacobi_eval(p, 1, 1.0);
        CHECK(zn_kernel(p, 1, 1.0) == doctest::Approx(p1 * p1 / jacobi_norm(p, 1)).epsilon(1e-13));
    }
    // Gegenbauer consistency: Z_n^{(l-1/2,l-1/2)}(t) = ((n+l)/l) C_n^l(t), l=1, n=3
    {
        const double lambda = 1.0;
        const int n = 3;
        const double t = 0.2;
        JacobiParams p(lambda - 0.5, lambda - 0.5);
        // C_n^l and P_n^{(l-1/2,l-1/2)} differ by a constant factor; Z normalizes it away:
        // Z_n(t) = P_n(t) P_n(1) / h_n must equal ((n+lambda)/lambda) C_n^lambda(t).
        double ref = (n + lambda) / lambda * gegenbauer(lambda, n, t);
        CHECK(zn_kernel(p, n, t) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("gauss_jacobi_rule basics") {
    {
        QuadratureRule r = gauss_jacobi_rule(JacobiParams(0.0, 0.0), 1);
        REQUIRE(r.size() == 1);
        CHECK(r.nodes[0] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(r.weights[0] == doctest::Approx(2.0).epsilon(1e-14));
    }
    {
        QuadratureRule r = gauss_jacobi_rule(JacobiParams(0.0, 0.0), 5);
        double v = r.integrate([](double t) { return std::pow(t, 8.0); });
        CHECK(v == doctest::Approx(2.0 / 9.0).epsilon(1e-13));
    }
    {
        JacobiParams p(1.0, 0.0);
        QuadratureRule r = gauss_jacobi_rule(p, 8);
        double q = r.integrate([&](double t) {
                       double v = jacobi_eval(p, 7, t);
                       return v * v;
                   }) /
                   r.total_mass;
        CHECK(std::abs(q - jacobi_norm(p, 7)) <= 1e-12 * jacobi_norm(p, 7));
    }
}

TEST_CASE("rule invariants: increasing interior nodes, positive weights, unit mass") {
    const double params[][2] = {{-0.5, -0.5}, {0.0, 0.0}, {1.0, 0.0}, {2.5, 0.7}};
    for (auto& ab : params) {
        JacobiParams p(ab[0], ab[1]);
        QuadratureRule r = gauss_jacobi_rule(p, 24);
        for (std::size_t i = 0; i < r.size(); ++i) {
            CHECK(r.weights[i] > 0.0);
            CHECK(r.nodes[i] > -1.0);
            CHECK(r.nodes[i] < 1.0);
            if (i) CHECK(r.nodes[i] > r.nodes[i - 1]);
        }
        double mass = r.integrate([](double) { return 1.0; });
        CHECK(std::abs(mass - r.total_mass) <= 1e-12 * r.total_mass);

        QuadratureRule r01 = gauss_jacobi_rule01(p, 24);
        for (std::size_t i = 0; i < r01.size(); ++i) {
            CHECK(r01.weights[i] > 0.0);
            CHECK(r01.nodes[i] > 0.0);
            CHECK(r01.nodes[i] < 1.0);
            if (i) CHECK(r01.nodes[i] > r01.nodes[i - 1]);
        }
        CHECK(r01.total_mass ==
              doctest::Approx(beta_function(ab[0] + 1.0, ab[1] + 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("[0,1] rule integrates the mapped weight correctly") {
    // Int_0^1 t^alpha (1-t)^beta t^k dt = B(alpha+k+1, beta+1)
    JacobiParams p(2.5, 0.7);
    QuadratureRule r = gauss_jacobi_rule01(p, 16);
    for (int k = 0; k <= 6; ++k) {
        double ref = beta_function(p.alpha + k + 1.0, p.beta + 1.0);
        double got = r.integrate([&](double t) { return std::pow(t, k); });
        CHECK(got == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("orthogonality across parameter pairs (acceptance-style)") {
    const double params[][2] = {{-0.5, -0.5}, {0.0, 0.0}, {1.0, 0.0}, {2.5, 0.7}};
    const int N = 40;
    for (auto& ab : params) {
        JacobiParams p(ab[0], ab[1]);
        int nodes = N + 1 + static_cast<int>(std::ceil(std::max(ab[0], ab[1])));
        QuadratureRule rule = gauss_jacobi_rule(p, nodes);
        std::vector<std::vector<double>> vals(rule.size());
        for (std::size_t i = 0; i < rule.size(); ++i)
            vals[i] = jacobi_eval_all(p, N, rule.nodes[i]);
        for (int n = 0; n <= N; ++n) {
            for (int m = 0; m < n; ++m) {
                double s = 0.0;
                for (std::size_t i = 0; i < rule.size(); ++i)
                    s += rule.weights[i] * vals[i][n] * vals[i][m];
                s /= rule.total_mass;
                double tol = 1e-10 * std::sqrt(jacobi_norm(p, n) * jacobi_norm(p, m));
                CHECK(std::abs(s) <= tol);
            }
        }
    }
}

TEST_CASE("jacobi_deriv matches finite differences") {
    JacobiParams p(1.5, 0.25);
    for (int n : {1, 3, 7}) {
        for (double t : {-0.5, 0.2, 0.8}) {
            double h = 1e-6;
            double fd = (jacobi_eval(p, n, t + h) - jacobi_eval(p, n, t - h)) / (2.0 * h);
            CHECK(jacobi_deriv(p, n, 1, t) == doctest::Approx(fd).epsilon(1e-7));
            double fd2 = (jacobi_eval(p, n, t + 1e-4) - 2.0 * jacobi_eval(p, n, t) +
                          jacobi_eval(p, n, t - 1e-4)) /
                         1e-8;
            if (n >= 2) CHECK(jacobi_deriv(p, n, 2, t) == doctest::Approx(fd2).epsilon(1e-5));
        }
    }
}
