#ifndef CONIC_INTERVAL_HPP
#define CONIC_INTERVAL_HPP

#include <functional>
#include <limits>
#include <vector>

#include "conic/cutoff.hpp"
#include "conic/jacobi.hpp"

namespace conic {

// Thrown when an operation is invoked with mismatched auxiliary data
// (e.g. a quadrature rule built for a different weight).
struct configuration_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a parameter combination collapses the working domain
// (e.g. a main-part interval that is empty).
struct degenerate_input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// arccos(sqrt(s)sqrt(t) + sqrt(1-s)sqrt(1-t)), the metric on [0,1];
// the inner expression is clamped into [-1,1] against round-off.
double interval_distance(double s, double t);

// (t + n^-2)^{alpha+1/2} (1 - t + n^-2)^{beta+1/2}: the degree-adapted
// weight on [0,1] that governs the kernel localization bounds.
double interval_weight_n(const JacobiParams& p, int n, double t);

// Localized Jacobi kernel of degree n:
//   L_n(x,y) = sum_{k <= 2n} a(k/n) P_k(x) P_k(y) / h_k     on [-1,1],
// with a smooth cut-off a (== 1 on [0,1], == 0 on [2,inf)).  The [0,1]
// variant composes with the affine map t -> 1-2t; its natural weight is
// t^alpha (1-t)^beta.  Immutable after construction.
class IntervalKernelEvaluator {
public:
    IntervalKernelEvaluator(const JacobiParams& params, int n, CutoffSpec cutoff = {});

    const JacobiParams& params() const { return p_; }
    int degree() const { return n_; }
    int max_index() const { return static_cast<int>(coef_.size()) - 1; }
    double coefficient(int k) const;  // a(k/n)/h_k, 0 for k > max_index

    double eval(double x, double y) const;    // [-1,1] kernel
    double eval01(double s, double t) const;  // kernel at (1-2s, 1-2t)
    // r-th partial derivative in t of the [0,1] kernel.
    double eval01_deriv_t(double s, double t, int r) const;

private:
    JacobiParams p_;
    int n_;
    std::vector<double> coef_;
};

// c_{alpha,beta} Int_0^1 f(s) L_n(s,t) s^alpha (1-s)^beta ds via the rule,
// normalized so that f == 1 maps to 1.  The rule must be a [0,1] rule for
// the evaluator's weight (checked through its total mass).
double localized_operator_apply(const IntervalKernelEvaluator& ev,
                                const std::function<double(double)>& f, double t,
                                const QuadratureRule& rule01);

// Same, with f pre-evaluated at the rule nodes (kernel-row reuse).
double localized_operator_apply_values(const IntervalKernelEvaluator& ev,
                                       const std::vector<double>& f_at_nodes, double t,
                                       const QuadratureRule& rule01);

// r-th t-derivative of the operator output.
double localized_operator_deriv(const IntervalKernelEvaluator& ev,
                                const std::function<double(double)>& f, double t, int r,
                                const QuadratureRule& rule01);

struct ModulusReport {
    std::vector<double> h_values;
    std::vector<double> component_values;
    double p = 2.0;
    int r = 1;
};

struct DtModulusOptions {
    double rho = 12.0;     // main-part interval [rho r^2 h^2, 1 - rho r^2 h^2]
    int theta_points = 16; // geometric grid h * 2^{-j/2} for the sup over theta
    int quad_points = 320; // Gauss points for L^p integrals (non-polynomial integrand)
    int sup_points = 2049; // grid size for p = infinity
};

// Ditzian-Totik modulus sup_{0 < theta <= h} || Delta^r_{theta phi} f ||_p with
// phi(t) = sqrt(t(1-t)) and the central difference
//   Delta^r_theta f(t) = sum_j (-1)^j C(r,j) f(t + (r/2 - j) theta).
// Unweighted (weight == nullptr): L^p on [0,1], difference set to 0 whenever
// the stencil leaves [0,1].  Main-part (requires weight): L^p against
// t^alpha (1-t)^beta restricted to [rho r^2 h^2, 1 - rho r^2 h^2].
// p may be infinity.
double dt_modulus(const std::function<double(double)>& f, int r, double h, double p,
                  const JacobiParams* weight, bool main_part,
                  const DtModulusOptions& opt = {});

ModulusReport dt_modulus_report(const std::function<double(double)>& f, int r,
                                const std::vector<double>& h_values, double p,
                                const JacobiParams* weight, bool main_part,
                                const DtModulusOptions& opt = {});

struct KFunctionalCandidate {
    std::function<double(double)> g;
    std::function<double(double)> g_deriv_r;  // r-th derivative of g
};

// min over candidates of ||f-g||_{p,w} + h^r ||phi^r g^(r)||_{p,w}
// (an upper bound on the true infimum).  Norms use the probability-normalized
// measure; p = infinity uses an interior sup grid.
double dt_kfunctional(const std::function<double(double)>& f, int r, double h, double p,
                      const JacobiParams& weight,
                      const std::vector<KFunctionalCandidate>& candidates,
                      const DtModulusOptions& opt = {});

// Default candidate list: g = L_{2^j} f for j = 0..jmax.
std::vector<KFunctionalCandidate> kfunctional_default_candidates(
    std::function<double(double)> f, const JacobiParams& weight, int r, int jmax = 5,
    CutoffSpec cutoff = {});

struct RatioReport {
    std::vector<int> degrees;
    std::vector<double> maxima;
};

// For each n, max over an s-grid of
//   Int_{-1}^{1} |L_n(s,t)| (1-t)^{alpha+gs} (1+t)^{beta+ds} dt
//     / [ (1-s+n^-2)^{gs} (1+s+n^-2)^{ds} ],
// which the localization theory asserts stays uniformly bounded in n.
RatioReport jacobi_kernel_integral_check(const JacobiParams& params, double gamma_shift,
                                         double delta_shift,
                                         const std::vector<int>& degrees = {8, 16, 32, 64},
                                         CutoffSpec cutoff = {});

// (Int |f|^p dmu / mu_total)^{1/p} for the rule's measure; p < infinity.
double lp_norm(const std::function<double(double)>& f, double p, const QuadratureRule& rule);

// max |f| over an equispaced interior grid of [a,b].
double sup_norm_grid(const std::function<double(double)>& f, double a, double b,
                     int points = 2049);

}  // namespace conic

#endif
