#ifndef CONIC_CONE_HPP
#define CONIC_CONE_HPP

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "conic/surface.hpp"

namespace conic {

// Point (x,t) of the solid cone {||x|| <= t, 0 <= t <= 1}, x in R^d.
struct ConePoint {
    Eigen::VectorXd x;
    double t;

    ConePoint(Eigen::VectorXd x_, double t_);
    int d() const { return static_cast<int>(x.size()); }
};

// Weight (t^2 - ||x||^2)^{-1/2} (1-t)^gamma on the cone (the mu = 0 family);
// singular on the lateral boundary, so every integral routes through the
// lift to the conic surface one dimension up.
struct ConeWeight {
    double gamma;
    int d;

    ConeWeight(double gamma_, int d_);
    // lifted surface weight: cross sections are spheres S^d in R^{d+1}
    SurfaceWeight lift_weight() const { return SurfaceWeight(gamma, d + 1); }
};

using ConeField = std::function<double(const ConePoint&)>;

// Phi(x,t) = sqrt(t^2 - ||x||^2), clamped at 0 against round-off.
double cone_phi(const ConePoint& p);

// Lift (x,t) -> ((x, sign*Phi), t) on the surface; the apex maps to the apex
// (with xi = sign*e_{d+1} as the immaterial direction).
SurfacePoint cone_lift(const ConePoint& p, int sign);

// Even extension f~ as a field on the lifted surface: f~((x,x_{d+1}), t) = f(x,t).
SurfaceField cone_lift_field(ConeField f, int d);

// dim of the space of cone polynomials of total degree <= n: C(n+d+1, n).
int cone_basis_count(int d, int n);

// L_n((x,t),(y,s)) = L_n^{surf}((X,t),(Y,s)) + L_n^{surf}((X,t),(Y*,s));
// equals 2 at n = 0 (the probability-normalized reproducing kernel on the
// cone is half of this sum; the operator route absorbs the factor).
double cone_kernel_eval(const SurfaceKernelEvaluator& ev, const ConePoint& a,
                        const ConePoint& b);

// Normalized integral over the cone via the lift: f == 1 -> 1.
double cone_integrate(const ConeField& f, const ConeWeight& w, const QuadratureRule& t_rule,
                      const SphericalQuadrature& s_rule);

// Near-best operator on the cone: L_n f(x,t) = L_n^{surf} f~(X,t).
double cone_nearbest_apply(const SurfaceKernelEvaluator& ev, const ConeField& f,
                           const ConePoint& p, const SurfaceRules& rules);

// L^p norm under the normalized cone measure (== the lifted surface norm).
double cone_norm(const ConeField& f, const ConeWeight& w, double p,
                 const SurfaceModulusOptions& opt = {});

// Radial-interval convention for the third modulus component:
// `definition` uses I_{rh} = [(rh)^2, 1-(rh)^2]; `surface` uses the conic
// surface convention [rho r^2 h^2, 1 - rho r^2 h^2].
enum class ConeRadialInterval { definition, surface };

struct ConeModulusParts {
    double angular = 0.0;         // pairs 1 <= i < j <= d (cone coordinates)
    double lifted_angular = 0.0;  // pairs (i, d+1), 1 <= i <= d, on the lift
    double radial = 0.0;          // Delta^r_{theta phi} f~ over the t-interval
    double total() const { return angular + lifted_angular + radial; }
};

ConeModulusParts cone_modulus_parts(const ConeField& f, const ConeWeight& w, int r, double h,
                                    double p,
                                    ConeRadialInterval interval = ConeRadialInterval::definition,
                                    const SurfaceModulusOptions& opt = {});
double cone_modulus(const ConeField& f, const ConeWeight& w, int r, double h, double p,
                    ConeRadialInterval interval = ConeRadialInterval::definition,
                    const SurfaceModulusOptions& opt = {});

// Smooth field with first and second x-partials (for the derivative identity).
struct ConeC2Field {
    ConeField f;
    std::function<double(int, const ConePoint&)> d1;       // d_i f, 1-based i
    std::function<double(int, int, const ConePoint&)> d2;  // d_i d_j f
};

// max over samples of |(-Phi d_i)^r g - D_{i,d+1}^r g~| with the left side
// by the chain rule ((-Phi d_i)^2 g = Phi^2 d_i^2 g - x_i d_i g) and the
// right side by the angular finite difference on the lift.  Samples with
// Phi < 1e-6 are skipped.
double phi_derivative_identity_check(const ConeC2Field& g, int i, int r,
                                     const std::vector<ConePoint>& samples);

struct ConeKCandidate {
    ConeField g;
    ConeField dt_r;                                            // d_t^r g
    std::function<double(int, int, const ConePoint&)> dij_r;   // D_{i,j}^r g, i < j <= d
    std::function<double(int, const ConePoint&)> phi_dr;       // (Phi d_i)^r g
};

// ||f-g|| + h^r ||phi^r d_t^r g|| + h^r max_{i<j<=d} ||t^{-r/2} D^r_{i,j} g||
//         + h^r max_{i<=d} ||t^{-r/2} (Phi d_i)^r g||, minimized over
// candidates; r in {1,2}.  All norms via the lift.
double cone_kfunctional(const ConeField& f, const ConeWeight& w, int r, double h, double p,
                        const std::vector<ConeKCandidate>& candidates,
                        const SurfaceModulusOptions& opt = {});

// Default candidates g = L_{2^j} f via series analysis on the lift,
// j = 0..jmax; angular derivatives by finite differences (r <= 2).
std::vector<ConeKCandidate> cone_default_candidates(const ConeField& f, const ConeWeight& w,
                                                    int r, int jmax = 5, CutoffSpec cutoff = {});

// E_n(f)_2 as the lifted series tail (the even extension keeps the same tail).
double cone_best_approx_l2(const ConeField& f, const ConeWeight& w, int n, int max_degree,
                           const SurfaceAnalyzeOptions& opt = {});

// Near-best surrogate ||f - L_{floor(n/2)} f||_p for p != 2.
double cone_best_approx_surrogate(const ConeField& f, const ConeWeight& w, int n, double p,
                                  int max_degree, const SurfaceAnalyzeOptions& opt = {});

}  // namespace conic

#endif
