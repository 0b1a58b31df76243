#include "conic/interval.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace conic {

namespace {

double binom(int r, int j) {
    double v = 1.0;
    for (int k = 0; k < j; ++k) v = v * (r - k) / (k + 1.0);
    return v;
}

bool is_inf(double p) { return std::isinf(p); }

}  // namespace

double interval_distance(double s, double t) {
    if (!(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0))
        throw std::domain_error("interval_distance: arguments must lie in [0,1]");
    double c = std::sqrt(s) * std::sqrt(t) + std::sqrt(1.0 - s) * std::sqrt(1.0 - t);
    if (c > 1.0) {
        if (c > 1.0 + 1e-12) throw numerical_failure("interval_distance: cosine out of range");
        c = 1.0;
    } else if (c < -1.0) {
        c = -1.0;
    }
    return std::acos(c);
}

double interval_weight_n(const JacobiParams& p, int n, double t) {
    const double off = 1.0 / (static_cast<double>(n) * n);
    return std::pow(t + off, p.alpha + 0.5) * std::pow(1.0 - t + off, p.beta + 0.5);
}

IntervalKernelEvaluator::IntervalKernelEvaluator(const JacobiParams& params, int n,
                                                 CutoffSpec cutoff)
    : p_(params), n_(n) {
    if (n < 0) throw std::invalid_argument("IntervalKernelEvaluator: degree must be >= 0");
    if (n == 0) {
        coef_ = {1.0};
        return;
    }
    coef_.resize(static_cast<std::size_t>(2 * n) + 1);
    for (int k = 0; k <= 2 * n; ++k)
        coef_[k] = cutoff(static_cast<double>(k) / n) / jacobi_norm(p_, k);
}

double IntervalKernelEvaluator::coefficient(int k) const {
    if (k < 0) throw std::invalid_argument("coefficient: k must be >= 0");
    if (k > max_index()) return 0.0;
    return coef_[k];
}

double IntervalKernelEvaluator::eval(double x, double y) const {
    const int K = max_index();
    std::vector<double> px = jacobi_eval_all(p_, K, x);
    std::vector<double> py = jacobi_eval_all(p_, K, y);
    double s = 0.0;
    for (int k = 0; k <= K; ++k) s += coef_[k] * px[k] * py[k];
    return s;
}

double IntervalKernelEvaluator::eval01(double s, double t) const {
    return eval(1.0 - 2.0 * s, 1.0 - 2.0 * t);
}

double IntervalKernelEvaluator::eval01_deriv_t(double s, double t, int r) const {
    const int K = max_index();
    std::vector<double> ps = jacobi_eval_all(p_, K, 1.0 - 2.0 * s);
    const double y = 1.0 - 2.0 * t;
    double sign = (r % 2) ? -1.0 : 1.0;
    double scale = sign * std::pow(2.0, r);
    double out = 0.0;
    for (int k = r; k <= K; ++k) out += coef_[k] * ps[k] * jacobi_deriv(p_, k, r, y);
    return scale * out;
}

namespace {

void check_rule01(const IntervalKernelEvaluator& ev, const QuadratureRule& rule01) {
    const double mass = beta_function(ev.params().alpha + 1.0, ev.params().beta + 1.0);
    if (std::abs(rule01.total_mass - mass) > 1e-8 * mass)
        throw configuration_error(
            "localized_operator: quadrature rule mass does not match the evaluator weight");
}

}  // namespace

double localized_operator_apply_values(const IntervalKernelEvaluator& ev,
                                       const std::vector<double>& f_at_nodes, double t,
                                       const QuadratureRule& rule01) {
    check_rule01(ev, rule01);
    if (f_at_nodes.size() != rule01.size())
        throw configuration_error("localized_operator_apply_values: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < rule01.size(); ++i)
        s += rule01.weights[i] * f_at_nodes[i] * ev.eval01(rule01.nodes[i], t);
    return s / rule01.total_mass;
}

double localized_operator_apply(const IntervalKernelEvaluator& ev,
                                const std::function<double(double)>& f, double t,
                                const QuadratureRule& rule01) {
    std::vector<double> fv(rule01.size());
    for (std::size_t i = 0; i < rule01.size(); ++i) fv[i] = f(rule01.nodes[i]);
    return localized_operator_apply_values(ev, fv, t, rule01);
}

double localized_operator_deriv(const IntervalKernelEvaluator& ev,
                                const std::function<double(double)>& f, double t, int r,
                                const QuadratureRule& rule01) {
    check_rule01(ev, rule01);
    double s = 0.0;
    for (std::size_t i = 0; i < rule01.size(); ++i)
        s += rule01.weights[i] * f(rule01.nodes[i]) * ev.eval01_deriv_t(rule01.nodes[i], t, r);
    return s / rule01.total_mass;
}

namespace {

// Central difference over the phi-scaled step; returns 0 when the stencil
// leaves [0,1] (the boundary convention of the unweighted modulus; the
// main-part interval keeps the stencil interior for the default rho).
double phi_difference(const std::function<double(double)>& f, int r, double theta, double t) {
    const double phi = std::sqrt(t * (1.0 - t));
    const double half = 0.5 * r * theta * phi;
    if (t - half < 0.0 || t + half > 1.0) return 0.0;
    double s = 0.0;
    for (int j = 0; j <= r; ++j) {
        double sign = (j % 2) ? -1.0 : 1.0;
        s += sign * binom(r, j) * f(t + (0.5 * r - j) * theta * phi);
    }
    return s;
}

double difference_norm(const std::function<double(double)>& f, int r, double theta, double p,
                       const JacobiParams* weight, bool main_part, double h,
                       const DtModulusOptions& opt) {
    double a = 0.0, b = 1.0;
    if (main_part) {
        const double margin = opt.rho * r * r * h * h;
        a = margin;
        b = 1.0 - margin;
        if (!(a < b)) throw degenerate_input_error("dt_modulus: main-part interval is empty");
    }
    if (is_inf(p)) {
        double m = 0.0;
        for (int i = 0; i < opt.sup_points; ++i) {
            double t = a + (b - a) * (i + 0.5) / opt.sup_points;
            m = std::max(m, std::abs(phi_difference(f, r, theta, t)));
        }
        return m;
    }
    QuadratureRule rule = gauss_legendre_rule(opt.quad_points, a, b);
    double norm_const = 1.0;
    if (weight)
        norm_const = beta_function(weight->alpha + 1.0, weight->beta + 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double t = rule.nodes[i];
        double w = rule.weights[i];
        if (weight)
            w *= std::pow(t, weight->alpha) * std::pow(1.0 - t, weight->beta) / norm_const;
        s += w * std::pow(std::abs(phi_difference(f, r, theta, t)), p);
    }
    return std::pow(s, 1.0 / p);
}

}  // namespace

double dt_modulus(const std::function<double(double)>& f, int r, double h, double p,
                  const JacobiParams* weight, bool main_part, const DtModulusOptions& opt) {
    if (r < 1) throw std::invalid_argument("dt_modulus: order r must be >= 1");
    if (!(h > 0.0)) throw std::invalid_argument("dt_modulus: h must be > 0");
    if (main_part && !weight)
        throw configuration_error("dt_modulus: main-part modulus requires a weight");
    double best = 0.0;
    for (int j = 0; j < opt.theta_points; ++j) {
        const double theta = h * std::pow(2.0, -0.5 * j);
        best = std::max(best, difference_norm(f, r, theta, p, weight, main_part, h, opt));
    }
    return best;
}

ModulusReport dt_modulus_report(const std::function<double(double)>& f, int r,
                                const std::vector<double>& h_values, double p,
                                const JacobiParams* weight, bool main_part,
                                const DtModulusOptions& opt) {
    ModulusReport rep;
    rep.h_values = h_values;
    rep.p = p;
    rep.r = r;
    rep.component_values.reserve(h_values.size());
    for (double h : h_values)
        rep.component_values.push_back(dt_modulus(f, r, h, p, weight, main_part, opt));
    return rep;
}

namespace {

double weighted_norm(const std::function<double(double)>& f, double p,
                     const JacobiParams& weight, const DtModulusOptions& opt) {
    if (is_inf(p)) return sup_norm_grid(f, 0.0, 1.0, opt.sup_points);
    QuadratureRule rule = gauss_jacobi_rule01(weight, opt.quad_points);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        s += rule.weights[i] * std::pow(std::abs(f(rule.nodes[i])), p);
    return std::pow(s / rule.total_mass, 1.0 / p);
}

}  // namespace

double dt_kfunctional(const std::function<double(double)>& f, int r, double h, double p,
                      const JacobiParams& weight,
                      const std::vector<KFunctionalCandidate>& candidates,
                      const DtModulusOptions& opt) {
    if (candidates.empty())
        throw configuration_error("dt_kfunctional: candidate list must be nonempty");
    double best = std::numeric_limits<double>::infinity();
    const double hr = std::pow(h, r);
    for (const auto& cand : candidates) {
        auto diff = [&](double t) { return f(t) - cand.g(t); };
        auto smooth = [&](double t) {
            return std::pow(std::sqrt(t * (1.0 - t)), r) * cand.g_deriv_r(t);
        };
        best = std::min(best, weighted_norm(diff, p, weight, opt) +
                                  hr * weighted_norm(smooth, p, weight, opt));
    }
    return best;
}

std::vector<KFunctionalCandidate> kfunctional_default_candidates(
    std::function<double(double)> f, const JacobiParams& weight, int r, int jmax,
    CutoffSpec cutoff) {
    std::vector<KFunctionalCandidate> out;
    for (int j = 0; j <= jmax; ++j) {
        const int n = 1 << j;
        auto ev = std::make_shared<IntervalKernelEvaluator>(weight, n, cutoff);
        auto rule =
            std::make_shared<QuadratureRule>(gauss_jacobi_rule01(weight, 2 * n + 16));
        auto fvals = std::make_shared<std::vector<double>>(rule->size());
        for (std::size_t i = 0; i < rule->size(); ++i) (*fvals)[i] = f(rule->nodes[i]);
        KFunctionalCandidate cand;
        cand.g = [ev, rule, fvals](double t) {
            return localized_operator_apply_values(*ev, *fvals, t, *rule);
        };
        cand.g_deriv_r = [ev, rule, fvals, r](double t) {
            double s = 0.0;
            for (std::size_t i = 0; i < rule->size(); ++i)
                s += rule->weights[i] * (*fvals)[i] * ev->eval01_deriv_t(rule->nodes[i], t, r);
            return s / rule->total_mass;
        };
        out.push_back(std::move(cand));
    }
    return out;
}

RatioReport jacobi_kernel_integral_check(const JacobiParams& params, double gamma_shift,
                                         double delta_shift, const std::vector<int>& degrees,
                                         CutoffSpec cutoff) {
    if (params.alpha < -0.5 || params.beta < -0.5)
        throw parameter_domain_error("jacobi_kernel_integral_check: need alpha,beta >= -1/2");
    if (gamma_shift < 0.0 || delta_shift < 0.0)
        throw std::invalid_argument("jacobi_kernel_integral_check: shifts must be >= 0");
    RatioReport rep;
    rep.degrees = degrees;
    for (int n : degrees) {
        if (n < 1) throw std::invalid_argument("jacobi_kernel_integral_check: degrees >= 1");
        IntervalKernelEvaluator ev(params, n, cutoff);
        QuadratureRule rule = gauss_jacobi_rule(
            JacobiParams(params.alpha + gamma_shift, params.beta + delta_shift), 4 * n + 16);
        const double off = 1.0 / (static_cast<double>(n) * n);
        double worst = 0.0;
        const int grid = 61;
        for (int i = 0; i < grid; ++i) {
            const double s = -1.0 + 2.0 * i / (grid - 1.0);
            double integral = 0.0;
            for (std::size_t q = 0; q < rule.size(); ++q)
                integral += rule.weights[q] * std::abs(ev.eval(s, rule.nodes[q]));
            const double denom = std::pow(1.0 - s + off, gamma_shift) *
                                 std::pow(1.0 + s + off, delta_shift);
            worst = std::max(worst, integral / denom);
        }
        rep.maxima.push_back(worst);
    }
    return rep;
}

double lp_norm(const std::function<double(double)>& f, double p, const QuadratureRule& rule) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        s += rule.weights[i] * std::pow(std::abs(f(rule.nodes[i])), p);
    return std::pow(s / rule.total_mass, 1.0 / p);
}

double sup_norm_grid(const std::function<double(double)>& f, double a, double b, int points) {
    double m = 0.0;
    for (int i = 0; i < points; ++i) {
        const double t = a + (b - a) * (i + 0.5) / points;
        m = std::max(m, std::abs(f(t)));
    }
    return m;
}

}  // namespace conic
