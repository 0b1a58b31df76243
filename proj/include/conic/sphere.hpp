#ifndef CONIC_SPHERE_HPP
#define CONIC_SPHERE_HPP

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "conic/jacobi.hpp"

namespace conic {

// Thrown when an operation needs a capability the inputs don't provide
// (e.g. derivative order beyond what is implemented).
struct capability_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Point on S^{d-1}; renormalized on construction.
struct UnitVector {
    Eigen::VectorXd coords;

    explicit UnitVector(Eigen::VectorXd v);
    int dim() const { return static_cast<int>(coords.size()); }
    double operator[](int i) const { return coords[i]; }
};

// Surface area of S^{d-1}: 2pi, 4pi, 2pi^2 for d = 2,3,4.
double sphere_surface_area(int d);

// dim H_m^d, the space of spherical harmonics of degree m on S^{d-1}.
int sph_harmonic_count(int d, int m);

// ell-th member (1-based) of a fixed real basis of H_m^d, orthonormal with
// respect to the un-normalized surface measure d(sigma).
// d=2: Fourier pairs; d=3: associated-Legendre real basis; d=4: zonal ladder
// over the d=3 basis.
double sph_harmonic_eval(int d, int m, int ell, const UnitVector& xi);

// Zonal kernel Z_m^{(d-2)/2}(u) = Z_m^{((d-3)/2,(d-3)/2)}(u); the addition
// formula reads  sigma_d * sum_ell Y_ell(xi) Y_ell(eta) = Z_m(<xi,eta>).
double zonal_kernel(int d, int m, double u);

// Plane rotation in the (i,j) coordinate plane, 1-based, 1 <= i < j <= dim;
// theta > 0 rotates e_i toward e_j.
struct RotationSpec {
    int i;
    int j;
    double theta;
};

Eigen::VectorXd rotate(const RotationSpec& spec, const Eigen::VectorXd& x);

// Delta^r_{i,j,theta} f(x) = (I - T_Q)^r f(x) with T_Q f(x) = f(Q^{-1} x),
// expanded binomially: sum_k (-1)^k C(r,k) f(Q^{-k} x).
double euler_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                        const RotationSpec& spec, int r, const Eigen::VectorXd& x);

// D_{i,j}^r f(x) with D_{i,j} = x_i d_j - x_j d_i = d/dtheta f(Q_theta x)|_0,
// computed by high-order central differences in the rotation angle; r <= 2.
double angular_derivative(const std::function<double(const Eigen::VectorXd&)>& f, int i, int j,
                          int r, const Eigen::VectorXd& x);

struct SphericalQuadrature {
    int d = 0;
    std::vector<Eigen::VectorXd> points;
    std::vector<double> weights;  // sum to sigma_d
    int exact_degree = 0;

    std::size_t size() const { return points.size(); }
    double total_mass() const;

    template <typename F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * f(points[i]);
        return s;
    }
};

// d=2: uniform grid; d=3: Gauss-Legendre (polar) x uniform (azimuth);
// d=4: Gauss-Gegenbauer x the d=3 rule.  Exact for polynomials of total
// degree <= exact_degree restricted to the sphere.
SphericalQuadrature spherical_quadrature(int d, int exact_degree);

}  // namespace conic

#endif
