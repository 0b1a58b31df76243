#ifndef CONIC_SURFACE_HPP
#define CONIC_SURFACE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "conic/cutoff.hpp"
#include "conic/interval.hpp"
#include "conic/jacobi.hpp"
#include "conic/sphere.hpp"

namespace conic {

// Point (x,t) = (t xi, t) on the conic surface {||x|| = t, 0 <= t <= 1}.
struct SurfacePoint {
    UnitVector xi;
    double t;

    SurfacePoint(UnitVector xi_, double t_);
    Eigen::VectorXd x() const { return t * xi.coords; }
    int d() const { return xi.dim(); }
};

// Weight t^{-1}(1-t)^gamma on the surface; the effective measure in t is
// t^{d-2}(1-t)^gamma dt x dsigma(xi), normalized to a probability measure.
struct SurfaceWeight {
    double gamma;
    int d;

    SurfaceWeight(double gamma_, int d_);
    JacobiParams t_params() const { return JacobiParams(d - 2.0, gamma); }
    double t_mass() const { return beta_function(d - 1.0, gamma + 1.0); }
};

struct SurfaceBasisIndex {
    int n;    // total degree
    int m;    // harmonic degree, 0 <= m <= n
    int ell;  // 1 <= ell <= dim H_m^d
};

// Geodesic-type distance on the surface.
double surface_distance(const SurfacePoint& a, const SurfacePoint& b);

// Degree-adapted weight (t+n^-2)^{(d-2)/2} (1-t+n^-2)^{gamma+1/2}.
double surface_weight_n(const SurfaceWeight& w, int n, double t);

// Localization profile G^kappa_{n,dexp}(u) = n^dexp / (1+n u)^kappa.
double g_localizer(int n, int dexp, double kappa, double u);

// Number of surface polynomial basis elements of total degree <= n.
int surface_basis_count(int d, int n);

// S^n_{m,ell}(x,t) = P_{n-m}^{(2m+d-2,gamma)}(1-2t) t^m Y_ell^m(xi).
double surface_basis_eval(const SurfaceBasisIndex& idx, const SurfaceWeight& w,
                          const SurfacePoint& p);

// <S,S> under the normalized measure:
//   B(2m+d-1,gamma+1) h_{n-m}^{(2m+d-2,gamma)} / (B(d-1,gamma+1) sigma_d).
double surface_basis_norm2(const SurfaceWeight& w, int n, int m);

struct SurfaceRules {
    QuadratureRule t_rule;  // [0,1] Gauss-Jacobi rule for t^{d-2}(1-t)^gamma
    SphericalQuadrature s_rule;
};

// Rules sufficient for degree-n operators applied to smooth fields.
SurfaceRules surface_default_rules(const SurfaceWeight& w, int n, int extra = 16);

using SurfaceField = std::function<double(const SurfacePoint&)>;

// Normalized integral: f == 1 -> 1.
double surface_measure_integrate(const SurfaceField& f, const SurfaceWeight& w,
                                 const QuadratureRule& t_rule,
                                 const SphericalQuadrature& s_rule);

enum class SurfaceBackend { basis_sum, addition_formula };

// Localized kernel L_n(a,b) = sum_{k<=2n} a(k/n) P_k(a,b) with P_k the
// (probability-normalized) degree-k reproducing kernel.  Immutable.
class SurfaceKernelEvaluator {
public:
    SurfaceKernelEvaluator(const SurfaceWeight& w, int n, CutoffSpec cutoff = {},
                           SurfaceBackend backend = SurfaceBackend::basis_sum);

    const SurfaceWeight& weight() const { return w_; }
    int degree() const { return n_; }
    SurfaceBackend backend() const { return backend_; }
    CutoffSpec cutoff() const { return cutoff_; }
    // companion interval evaluator with parameters (d-2, gamma)
    const IntervalKernelEvaluator& interval() const { return *interval_; }

    double kernel(const SurfacePoint& a, const SurfacePoint& b) const;
    // single reproducing kernel P_k, k <= 2n
    double projection_kernel(int k, const SurfacePoint& a, const SurfacePoint& b) const;

private:
    double kernel_basis_sum(const SurfacePoint& a, const SurfacePoint& b) const;
    double kernel_addition(const SurfacePoint& a, const SurfacePoint& b) const;

    SurfaceWeight w_;
    int n_;
    CutoffSpec cutoff_;
    SurfaceBackend backend_;
    std::shared_ptr<IntervalKernelEvaluator> interval_;
    std::vector<double> chat_;                    // a(k/n), k <= 2n
    std::vector<std::vector<double>> hinv_;       // [m][j]: B-ratio / h_j^{(2m+d-2,gamma)}
    std::vector<double> zfac_;                    // P_m(1)/h_m for the zonal factor
    JacobiParams zparams_;                        // ((d-3)/2, (d-3)/2)
    JacobiParams aparams_;                        // (gamma+d-3/2, -1/2) addition formula
    std::vector<double> afac_;                    // P_k(1)/h_k for aparams_
    QuadratureRule v1_, v2_;                      // addition-formula rules (v1 empty if d=2)
};

// L_n f(p) by quadrature; reproduces polynomials of degree <= n.
double nearbest_apply(const SurfaceKernelEvaluator& ev, const SurfaceField& f,
                      const SurfacePoint& p, const SurfaceRules& rules);

// G_n f(t xi, t) = interval operator applied to s -> f(s xi, s) at s = t.
double gn_apply(const SurfaceKernelEvaluator& ev, const SurfaceField& f, const SurfacePoint& p,
                const QuadratureRule& t_rule);

// (f - G_n f, G_n f - L_n f) at p; the parts sum to f - L_n f.
std::pair<double, double> split_f1_f2(const SurfaceKernelEvaluator& ev, const SurfaceField& f,
                                      const SurfacePoint& p, const SurfaceRules& rules);

// One (m, ell) channel of a surface polynomial series:
//   sum_j coef[j] P_j^{(2m+d-2,gamma)}(1-2t) t^m Y_ell^m(xi).
struct SurfaceChannel {
    int m = 0;
    int ell = 1;
    std::vector<double> coef;  // indexed by j = k - m
};

struct SurfaceAnalyzeOptions {
    int m_max = -1;          // default: max_degree
    int t_nodes = 0;         // default: max_degree + 24
    int sphere_degree = 0;   // default: 2*max_degree + 8
    double prune_tol = 1e-13;
};

// Orthogonal series representation of a field (exact for polynomials,
// near-best projection otherwise); supports filtered evaluation and
// analytic derivatives.
class SurfaceSeries {
public:
    SurfaceSeries(const SurfaceWeight& w, std::vector<SurfaceChannel> channels);
    static SurfaceSeries analyze(const SurfaceField& f, const SurfaceWeight& w, int max_degree,
                                 const SurfaceAnalyzeOptions& opt = {});

    const SurfaceWeight& weight() const { return w_; }
    const std::vector<SurfaceChannel>& channels() const { return channels_; }
    int max_degree() const { return max_degree_; }

    // filter hat is indexed by total degree k; entries beyond its size are 0.
    double eval(const std::vector<double>& hat, const SurfacePoint& p) const;
    double eval_full(const SurfacePoint& p) const;
    // analytic r-th t-derivative of the filtered series
    double eval_dt(const std::vector<double>& hat, int r, const SurfacePoint& p) const;
    // analytic D_{1,2}^r (= d/dphi^r); d = 2 only
    double eval_dphi(const std::vector<double>& hat, int r, const SurfacePoint& p) const;

    double proj_norm2(int k) const;  // ||proj_k||^2 under the normalized measure
    double tail_norm(int n) const;   // sqrt(sum_{k>n} proj_norm2), clamped at 0

private:
    SurfaceWeight w_;
    std::vector<SurfaceChannel> channels_;
    int max_degree_ = 0;
};

// cut-off filter values a(k/n) for k = 0..kmax
std::vector<double> cutoff_hat(int n, int kmax, CutoffSpec cutoff = {});

// E_n(f)_2 as the tail norm of the analyzed series (resolution max_degree).
double best_approx_l2(const SurfaceField& f, const SurfaceWeight& w, int n, int max_degree,
                      const SurfaceAnalyzeOptions& opt = {});

// Near-best surrogate ||f - L_{floor(n/2)} f||_p for p != 2.
double best_approx_surrogate(const SurfaceField& f, const SurfaceWeight& w, int n, double p,
                             int max_degree, const SurfaceAnalyzeOptions& opt = {});

struct SurfaceModulusOptions {
    double rho = 12.0;
    int theta_points = 16;
    int t_quad = 160;
    int sphere_degree = 30;
    int sup_t = 257;
};

// ||Delta^r_{i,j,theta/sqrt(t)} f||_p over the full normalized measure.
double surface_euler_component(const SurfaceField& f, const SurfaceWeight& w, int r,
                               double theta, double p, int i, int j,
                               const SurfaceModulusOptions& opt = {});

// ||Delta^r_{theta phi} f||_p with t restricted to [lo, hi] (radial central
// difference with step theta*phi(t), zero when the stencil leaves [0,1]).
double surface_radial_component(const SurfaceField& f, const SurfaceWeight& w, int r,
                                double theta, double p, double lo, double hi,
                                const SurfaceModulusOptions& opt = {});

// Definition-3.1 modulus: (radial part over t in [rho r^2 h^2, 1-...],
// Euler part with increment theta/sqrt(t)); the modulus is their sum.
std::pair<double, double> surface_modulus_parts(const SurfaceField& f, const SurfaceWeight& w,
                                                int r, double h, double p,
                                                const SurfaceModulusOptions& opt = {});
double surface_modulus(const SurfaceField& f, const SurfaceWeight& w, int r, double h, double p,
                       const SurfaceModulusOptions& opt = {});

// L^p norm of a field under the normalized surface measure (sup grid for p=inf).
double surface_norm(const SurfaceField& f, const SurfaceWeight& w, double p,
                    const SurfaceModulusOptions& opt = {});

struct SurfaceKCandidate {
    SurfaceField g;
    SurfaceField dt_r;                                    // d_t^r g
    std::function<double(int, int, const SurfacePoint&)> dij_r;  // D_{i,j}^r g
};

// ||f-g|| + h^r ||phi^r d_t^r g|| + h^r max_{i<j} ||t^{-r/2} D^r_{i,j} g||,
// minimized over candidates (upper bound of the infimum); r in {1,2}.
double surface_kfunctional(const SurfaceField& f, const SurfaceWeight& w, int r, double h,
                           double p, const std::vector<SurfaceKCandidate>& candidates,
                           const SurfaceModulusOptions& opt = {});

// Default candidates g = L_{2^j} f, j = 0..jmax, via series analysis.
std::vector<SurfaceKCandidate> surface_default_candidates(const SurfaceField& f,
                                                          const SurfaceWeight& w, int r,
                                                          int jmax = 5, CutoffSpec cutoff = {});

enum class CommutationKind { radial_difference, euler_difference };

// Commutation residuals with the difference operators, max over samples.
// Euler kind: |Delta_{i,j,psi}(L_n f) - L_n(Delta_{i,j,psi} f)| at fixed
// angle psi (exact by rotation invariance).  Radial kind: the same residual
// for the ray-wise companion operator G_n with the step theta*phi(t) frozen
// at the sample point -- a fixed radial shift leaves the surface polynomial
// space, so the full operator commutes only up to an O(theta) apex defect.
struct CommutationParams {
    int r = 1;
    double theta = 0.1;  // radial theta or euler angle psi
    int i = 1, j = 2;
};
double commutation_check(const SurfaceKernelEvaluator& ev, const SurfaceField& f,
                         CommutationKind kind, const CommutationParams& params,
                         const std::vector<SurfacePoint>& samples, const SurfaceRules& rules);

// max over random degree-n polynomials of
//   || t^{-r/2} D^r f || / (n^r ||f||)  and  || phi^r d_t^r f || / (n^r ||f||)
// (L2 norms).  Returns the max of the two ratios.
double bernstein_ratio(const SurfaceWeight& w, int n, int r, int trials, std::uint64_t seed,
                       const SurfaceModulusOptions& opt = {});

}  // namespace conic

#endif
