#include "conic/sphere.hpp"

#include <cmath>

namespace conic {

namespace {

double binom_real(int r, int j) {
    double v = 1.0;
    for (int k = 0; k < j; ++k) v = v * (r - k) / (k + 1.0);
    return v;
}

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

// Int_{-1}^{1} C_n^lambda(x)^2 (1-x^2)^{lambda-1/2} dx
double gegenbauer_norm(double lambda, int n) {
    return M_PI * std::pow(2.0, 1.0 - 2.0 * lambda) *
           std::exp(std::lgamma(n + 2.0 * lambda) - std::lgamma(n + 1.0) -
                    2.0 * std::lgamma(lambda)) /
           (n + lambda);
}

double d3_harmonic(int m, int ell, double x3, double phi) {
    // ell = 1 -> order 0; ell = 2k -> cos(k phi); ell = 2k+1 -> sin(k phi)
    if (ell == 1)
        return std::sqrt((2.0 * m + 1.0) / (4.0 * M_PI)) * std::legendre(m, x3);
    const int mu = ell / 2;
    double ratio = 1.0;  // (m-mu)! / (m+mu)!
    for (int k = m - mu + 1; k <= m + mu; ++k) ratio /= k;
    const double norm = std::sqrt((2.0 * m + 1.0) / (2.0 * M_PI) * ratio);
    const double plm = std::assoc_legendre(m, mu, x3);
    return norm * plm * ((ell % 2 == 0) ? std::cos(mu * phi) : std::sin(mu * phi));
}

}  // namespace

UnitVector::UnitVector(Eigen::VectorXd v) : coords(std::move(v)) {
    const double n = coords.norm();
    if (!(n > 0.0)) throw std::invalid_argument("UnitVector: zero vector");
    coords /= n;
}

double sphere_surface_area(int d) {
    switch (d) {
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
        case 4: return 2.0 * M_PI * M_PI;
        default: throw std::invalid_argument("sphere_surface_area: d must be 2, 3, or 4");
    }
}

int sph_harmonic_count(int d, int m) {
    if (m < 0) throw std::invalid_argument("sph_harmonic_count: m >= 0 required");
    switch (d) {
        case 2: return m == 0 ? 1 : 2;
        case 3: return 2 * m + 1;
        case 4: return (m + 1) * (m + 1);
        default: throw std::invalid_argument("sph_harmonic_count: d must be 2, 3, or 4");
    }
}

double sph_harmonic_eval(int d, int m, int ell, const UnitVector& xi) {
    if (xi.dim() != d) throw std::invalid_argument("sph_harmonic_eval: dimension mismatch");
    if (ell < 1 || ell > sph_harmonic_count(d, m))
        throw std::out_of_range("sph_harmonic_eval: harmonic index out of range");
    if (d == 2) {
        if (m == 0) return 1.0 / std::sqrt(2.0 * M_PI);
        const double phi = std::atan2(xi[1], xi[0]);
        return (ell == 1 ? std::cos(m * phi) : std::sin(m * phi)) / std::sqrt(M_PI);
    }
    if (d == 3) {
        const double phi = std::atan2(xi[1], xi[0]);
        return d3_harmonic(m, ell, xi[2], phi);
    }
    // d == 4: xi = (sin(chi) eta, cos(chi)), eta in S^2;
    // Y_{m;j,l}(xi) = c_{m,j} sin(chi)^j C_{m-j}^{(j+1)}(cos(chi)) Y_{j,l}(eta)
    const double c = xi[3];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const int j = static_cast<int>(std::floor(std::sqrt(static_cast<double>(ell - 1))));
    const int li = ell - j * j;
    double eta3 = 0.0, phi = 0.0;
    if (s > 1e-300) {
        eta3 = xi[2] / s;
        phi = std::atan2(xi[1], xi[0]);
        if (eta3 > 1.0) eta3 = 1.0;
        if (eta3 < -1.0) eta3 = -1.0;
    } else if (j > 0) {
        return 0.0;  // sin(chi)^j factor kills everything off the pole for j >= 1
    }
    const double cj = 1.0 / std::sqrt(gegenbauer_norm(j + 1.0, m - j));
    return cj * std::pow(s, j) * gegenbauer(j + 1.0, m - j, c) * d3_harmonic(j, li, eta3, phi);
}

double zonal_kernel(int d, int m, double u) {
    return zn_kernel(JacobiParams((d - 3) / 2.0, (d - 3) / 2.0), m, u);
}

Eigen::VectorXd rotate(const RotationSpec& spec, const Eigen::VectorXd& x) {
    if (spec.i < 1 || spec.j <= spec.i || spec.j > x.size())
        throw std::invalid_argument("rotate: need 1 <= i < j <= dim");
    Eigen::VectorXd y = x;
    const double c = std::cos(spec.theta), s = std::sin(spec.theta);
    const double xi = x[spec.i - 1], xj = x[spec.j - 1];
    y[spec.i - 1] = xi * c - xj * s;
    y[spec.j - 1] = xi * s + xj * c;
    return y;
}

double euler_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                        const RotationSpec& spec, int r, const Eigen::VectorXd& x) {
    if (r < 1) throw std::invalid_argument("euler_difference: r >= 1 required");
    double s = 0.0;
    for (int k = 0; k <= r; ++k) {
        const double sign = (k % 2) ? -1.0 : 1.0;
        RotationSpec back{spec.i, spec.j, -k * spec.theta};
        s += sign * binom_real(r, k) * f(rotate(back, x));
    }
    return s;
}

double angular_derivative(const std::function<double(const Eigen::VectorXd&)>& f, int i, int j,
                          int r, const Eigen::VectorXd& x) {
    if (r == 0) return f(x);
    if (r < 0 || r > 2)
        throw capability_error("angular_derivative: only orders r <= 2 are implemented");
    auto g = [&](double theta) { return f(rotate(RotationSpec{i, j, theta}, x)); };
    const double h = 1e-3;
    if (r == 1)
        return (-g(2 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2 * h)) / (12.0 * h);
    return (-g(2 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2 * h)) /
           (12.0 * h * h);
}

double SphericalQuadrature::total_mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

SphericalQuadrature spherical_quadrature(int d, int exact_degree) {
    if (exact_degree < 0) throw std::invalid_argument("spherical_quadrature: degree >= 0");
    SphericalQuadrature q;
    q.d = d;
    q.exact_degree = exact_degree;
    if (d == 2) {
        const int n = exact_degree + 1;
        q.points.reserve(n);
        for (int k = 0; k < n; ++k) {
            const double phi = 2.0 * M_PI * k / n;
            Eigen::VectorXd p(2);
            p << std::cos(phi), std::sin(phi);
            q.points.push_back(p);
            q.weights.push_back(2.0 * M_PI / n);
        }
        return q;
    }
    if (d == 3) {
        const int nt = exact_degree / 2 + 1;
        const int np = exact_degree + 1;
        QuadratureRule polar = gauss_legendre_rule(nt);
        for (std::size_t a = 0; a < polar.size(); ++a) {
            const double x3 = polar.nodes[a];
            const double sin_theta = std::sqrt(std::max(0.0, 1.0 - x3 * x3));
            for (int b = 0; b < np; ++b) {
                const double phi = 2.0 * M_PI * b / np;
                Eigen::VectorXd p(3);
                p << sin_theta * std::cos(phi), sin_theta * std::sin(phi), x3;
                q.points.push_back(p);
                q.weights.push_back(polar.weights[a] * 2.0 * M_PI / np);
            }
        }
        return q;
    }
    if (d == 4) {
        const int nc = exact_degree / 2 + 1;
        QuadratureRule chi = gauss_jacobi_rule(JacobiParams(0.5, 0.5), nc);
        SphericalQuadrature inner = spherical_quadrature(3, exact_degree);
        for (std::size_t a = 0; a < chi.size(); ++a) {
            const double x4 = chi.nodes[a];
            const double sin_chi = std::sqrt(std::max(0.0, 1.0 - x4 * x4));
            for (std::size_t b = 0; b < inner.size(); ++b) {
                Eigen::VectorXd p(4);
                p.head(3) = sin_chi * inner.points[b];
                p[3] = x4;
                q.points.push_back(p);
                // the (1-x^2)^{1/2} Jacobi weight already carries the sin^2 factor
                // jointly with the dx measure
                q.weights.push_back(chi.weights[a] * inner.weights[b]);
            }
        }
        return q;
    }
    throw std::invalid_argument("spherical_quadrature: d must be 2, 3, or 4");
}

}  // namespace conic
