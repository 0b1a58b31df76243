#include "conic/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace conic {

namespace {

double binom_real(int r, int j) {
    double v = 1.0;
    for (int k = 0; k < j; ++k) v = v * (r - k) / (k + 1.0);
    return v;
}

double falling(int m, int s) {
    if (s > m) return 0.0;
    double v = 1.0;
    for (int k = 0; k < s; ++k) v *= m - k;
    return v;
}

double clamp_pm1(double u) { return std::max(-1.0, std::min(1.0, u)); }

double phi_fn(double t) { return std::sqrt(t * (1.0 - t)); }

}  // namespace

SurfacePoint::SurfacePoint(UnitVector xi_, double t_) : xi(std::move(xi_)), t(t_) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::domain_error("SurfacePoint: t must lie in [0,1]");
}

SurfaceWeight::SurfaceWeight(double gamma_, int d_) : gamma(gamma_), d(d_) {
    if (!(gamma >= 0.0))
        throw parameter_domain_error("SurfaceWeight: gamma >= 0 required");
    if (d < 2 || d > 4) throw std::invalid_argument("SurfaceWeight: d must be 2, 3, or 4");
}

double surface_distance(const SurfacePoint& a, const SurfacePoint& b) {
    const double u = clamp_pm1(a.xi.coords.dot(b.xi.coords));
    const double inner = a.t * b.t * u;
    double c = std::sqrt(std::max(0.0, 0.5 * (inner + a.t * b.t))) +
               std::sqrt(1.0 - a.t) * std::sqrt(1.0 - b.t);
    return std::acos(clamp_pm1(c));
}

double surface_weight_n(const SurfaceWeight& w, int n, double t) {
    const double off = 1.0 / (static_cast<double>(n) * n);
    return std::pow(t + off, (w.d - 2.0) / 2.0) * std::pow(1.0 - t + off, w.gamma + 0.5);
}

double g_localizer(int n, int dexp, double kappa, double u) {
    return std::pow(static_cast<double>(n), dexp) / std::pow(1.0 + n * u, kappa);
}

int surface_basis_count(int d, int n) {
    int total = 0;
    for (int k = 0; k <= n; ++k)
        for (int m = 0; m <= k; ++m) total += sph_harmonic_count(d, m);
    return total;
}

double surface_basis_eval(const SurfaceBasisIndex& idx, const SurfaceWeight& w,
                          const SurfacePoint& p) {
    if (idx.m < 0 || idx.m > idx.n || idx.ell < 1 || idx.ell > sph_harmonic_count(w.d, idx.m))
        throw std::out_of_range("surface_basis_eval: invalid index");
    JacobiParams jp(2.0 * idx.m + w.d - 2.0, w.gamma);
    return jacobi_eval(jp, idx.n - idx.m, 1.0 - 2.0 * p.t) * std::pow(p.t, idx.m) *
           sph_harmonic_eval(w.d, idx.m, idx.ell, p.xi);
}

double surface_basis_norm2(const SurfaceWeight& w, int n, int m) {
    JacobiParams jp(2.0 * m + w.d - 2.0, w.gamma);
    return beta_function(2.0 * m + w.d - 1.0, w.gamma + 1.0) * jacobi_norm(jp, n - m) /
           (w.t_mass() * sphere_surface_area(w.d));
}

SurfaceRules surface_default_rules(const SurfaceWeight& w, int n, int extra) {
    SurfaceRules rules;
    rules.t_rule = gauss_jacobi_rule01(w.t_params(), 2 * n + 1 + extra);
    rules.s_rule = spherical_quadrature(w.d, 4 * n + 2 * extra);
    return rules;
}

double surface_measure_integrate(const SurfaceField& f, const SurfaceWeight& w,
                                 const QuadratureRule& t_rule,
                                 const SphericalQuadrature& s_rule) {
    const double mass = w.t_mass();
    if (std::abs(t_rule.total_mass - mass) > 1e-8 * mass)
        throw configuration_error("surface_measure_integrate: t-rule mass mismatch");
    if (s_rule.d != w.d)
        throw configuration_error("surface_measure_integrate: sphere rule dimension mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < t_rule.size(); ++i) {
        const double t = t_rule.nodes[i];
        double inner = 0.0;
        for (std::size_t b = 0; b < s_rule.size(); ++b)
            inner += s_rule.weights[b] * f(SurfacePoint(UnitVector(s_rule.points[b]), t));
        total += t_rule.weights[i] * inner;
    }
    return total / (mass * sphere_surface_area(w.d));
}

SurfaceKernelEvaluator::SurfaceKernelEvaluator(const SurfaceWeight& w, int n, CutoffSpec cutoff,
                                               SurfaceBackend backend)
    : w_(w),
      n_(n),
      cutoff_(cutoff),
      backend_(backend),
      zparams_((w.d - 3) / 2.0, (w.d - 3) / 2.0),
      aparams_(w.gamma + w.d - 1.5, -0.5) {
    if (n < 0) throw std::invalid_argument("SurfaceKernelEvaluator: degree >= 0 required");
    interval_ = std::make_shared<IntervalKernelEvaluator>(w.t_params(), n, cutoff);

    const int K = std::max(2 * n, 0);
    chat_.resize(K + 1);
    if (n == 0) {
        chat_[0] = 1.0;
    } else {
        for (int k = 0; k <= K; ++k) chat_[k] = cutoff_(static_cast<double>(k) / n);
    }

    const double bmass = w_.t_mass();
    hinv_.resize(K + 1);
    zfac_.resize(K + 1);
    for (int m = 0; m <= K; ++m) {
        JacobiParams jp(2.0 * m + w_.d - 2.0, w_.gamma);
        const double bratio = bmass / beta_function(2.0 * m + w_.d - 1.0, w_.gamma + 1.0);
        hinv_[m].resize(K - m + 1);
        for (int j = 0; j <= K - m; ++j) hinv_[m][j] = bratio / jacobi_norm(jp, j);
        zfac_[m] = jacobi_at_one(zparams_, m) / jacobi_norm(zparams_, m);
    }

    afac_.resize(K + 1);
    for (int k = 0; k <= K; ++k)
        afac_[k] = jacobi_at_one(aparams_, k) / jacobi_norm(aparams_, k);
    const int vn = 2 * n + 2;
    if (w_.d >= 3)
        v1_ = gauss_jacobi_rule(JacobiParams((w_.d - 4) / 2.0, (w_.d - 4) / 2.0), vn);
    v2_ = gauss_jacobi_rule(JacobiParams(w_.gamma - 0.5, w_.gamma - 0.5), vn);
}

double SurfaceKernelEvaluator::kernel(const SurfacePoint& a, const SurfacePoint& b) const {
    return backend_ == SurfaceBackend::basis_sum ? kernel_basis_sum(a, b)
                                                 : kernel_addition(a, b);
}

double SurfaceKernelEvaluator::kernel_basis_sum(const SurfacePoint& a,
                                                const SurfacePoint& b) const {
    const int K = static_cast<int>(chat_.size()) - 1;
    const double u = clamp_pm1(a.xi.coords.dot(b.xi.coords));
    std::vector<double> pz = jacobi_eval_all(zparams_, K, u);
    double total = 0.0;
    double tspow = 1.0;
    const double ta = 1.0 - 2.0 * a.t, tb = 1.0 - 2.0 * b.t;
    for (int m = 0; m <= K; ++m) {
        JacobiParams jp(2.0 * m + w_.d - 2.0, w_.gamma);
        std::vector<double> pa = jacobi_eval_all(jp, K - m, ta);
        std::vector<double> pb = jacobi_eval_all(jp, K - m, tb);
        double inner = 0.0;
        for (int j = 0; j <= K - m; ++j)
            inner += chat_[m + j] * pa[j] * pb[j] * hinv_[m][j];
        total += tspow * pz[m] * zfac_[m] * inner;
        tspow *= a.t * b.t;
        if (tspow == 0.0) break;
    }
    return total;
}

double SurfaceKernelEvaluator::projection_kernel(int k, const SurfacePoint& a,
                                                 const SurfacePoint& b) const {
    const int K = static_cast<int>(chat_.size()) - 1;
    if (k < 0 || k > K) throw std::out_of_range("projection_kernel: k out of range");
    const double u = clamp_pm1(a.xi.coords.dot(b.xi.coords));
    std::vector<double> pz = jacobi_eval_all(zparams_, k, u);
    double total = 0.0;
    double tspow = 1.0;
    for (int m = 0; m <= k; ++m) {
        JacobiParams jp(2.0 * m + w_.d - 2.0, w_.gamma);
        total += tspow * pz[m] * zfac_[m] * hinv_[m][k - m] *
                 jacobi_eval(jp, k - m, 1.0 - 2.0 * a.t) *
                 jacobi_eval(jp, k - m, 1.0 - 2.0 * b.t);
        tspow *= a.t * b.t;
        if (tspow == 0.0) break;
    }
    return total;
}

double SurfaceKernelEvaluator::kernel_addition(const SurfacePoint& a,
                                               const SurfacePoint& b) const {
    const int K = static_cast<int>(chat_.size()) - 1;
    const double u = clamp_pm1(a.xi.coords.dot(b.xi.coords));
    const double t = a.t, s = b.t;
    const double amp = std::sqrt(std::max(0.0, 0.5 * t * s * (1.0 + u)));
    const double bmp = std::sqrt(1.0 - t) * std::sqrt(1.0 - s);

    std::vector<double> acc(K + 1, 0.0);
    auto accumulate = [&](double v1, double w1) {
        for (std::size_t q = 0; q < v2_.size(); ++q) {
            const double zeta = v1 * amp + v2_.nodes[q] * bmp;
            const double arg = clamp_pm1(2.0 * zeta * zeta - 1.0);
            std::vector<double> pk = jacobi_eval_all(aparams_, K, arg);
            const double wgt = w1 * v2_.weights[q];
            for (int k = 0; k <= K; ++k) acc[k] += wgt * pk[k] * afac_[k];
        }
    };
    double mass1;
    if (w_.d == 2) {
        // (d-4)/2 = -1 is not integrable; the limit measure is the endpoint average
        accumulate(-1.0, 0.5);
        accumulate(1.0, 0.5);
        mass1 = 1.0;
    } else {
        for (std::size_t q = 0; q < v1_.size(); ++q)
            accumulate(v1_.nodes[q], v1_.weights[q]);
        mass1 = v1_.total_mass;
    }
    double total = 0.0;
    for (int k = 0; k <= K; ++k) total += chat_[k] * acc[k];
    return total / (mass1 * v2_.total_mass);
}

double nearbest_apply(const SurfaceKernelEvaluator& ev, const SurfaceField& f,
                      const SurfacePoint& p, const SurfaceRules& rules) {
    const SurfaceWeight& w = ev.weight();
    const double mass = w.t_mass();
    if (std::abs(rules.t_rule.total_mass - mass) > 1e-8 * mass)
        throw configuration_error("nearbest_apply: t-rule mass mismatch");
    if (rules.s_rule.d != w.d)
        throw configuration_error("nearbest_apply: sphere rule dimension mismatch");
    if (rules.t_rule.exact_degree < 2 * ev.degree() ||
        rules.s_rule.exact_degree < 2 * ev.degree())
        throw configuration_error("nearbest_apply: quadrature exactness insufficient");
    double total = 0.0;
    for (std::size_t i = 0; i < rules.t_rule.size(); ++i) {
        const double t = rules.t_rule.nodes[i];
        double inner = 0.0;
        for (std::size_t bidx = 0; bidx < rules.s_rule.size(); ++bidx) {
            SurfacePoint b(UnitVector(rules.s_rule.points[bidx]), t);
            inner += rules.s_rule.weights[bidx] * f(b) * ev.kernel(p, b);
        }
        total += rules.t_rule.weights[i] * inner;
    }
    return total / (mass * sphere_surface_area(w.d));
}

double gn_apply(const SurfaceKernelEvaluator& ev, const SurfaceField& f, const SurfacePoint& p,
                const QuadratureRule& t_rule) {
    const UnitVector xi = p.xi;
    auto radial = [&](double s) { return f(SurfacePoint(xi, s)); };
    return localized_operator_apply(ev.interval(), radial, p.t, t_rule);
}

std::pair<double, double> split_f1_f2(const SurfaceKernelEvaluator& ev, const SurfaceField& f,
                                      const SurfacePoint& p, const SurfaceRules& rules) {
    const double gf = gn_apply(ev, f, p, rules.t_rule);
    const double lf = nearbest_apply(ev, f, p, rules);
    return {f(p) - gf, gf - lf};
}

SurfaceSeries::SurfaceSeries(const SurfaceWeight& w, std::vector<SurfaceChannel> channels)
    : w_(w), channels_(std::move(channels)) {
    for (const auto& ch : channels_) {
        if (ch.m < 0 || ch.ell < 1 || ch.ell > sph_harmonic_count(w_.d, ch.m))
            throw std::out_of_range("SurfaceSeries: invalid channel index");
        if (!ch.coef.empty())
            max_degree_ = std::max(max_degree_, ch.m + static_cast<int>(ch.coef.size()) - 1);
    }
    std::stable_sort(channels_.begin(), channels_.end(),
                     [](const SurfaceChannel& a, const SurfaceChannel& b) { return a.m < b.m; });
}

SurfaceSeries SurfaceSeries::analyze(const SurfaceField& f, const SurfaceWeight& w,
                                     int max_degree, const SurfaceAnalyzeOptions& opt) {
    const int K = max_degree;
    const int mmax = std::min(K, opt.m_max < 0 ? K : opt.m_max);
    const int nt = opt.t_nodes > 0 ? opt.t_nodes : K + 24;
    const int sd = opt.sphere_degree > 0 ? opt.sphere_degree : 2 * K + 8;
    QuadratureRule t_rule = gauss_jacobi_rule01(w.t_params(), nt);
    SphericalQuadrature s_rule = spherical_quadrature(w.d, sd);
    const double sigma = sphere_surface_area(w.d);

    // field values at the product grid
    std::vector<std::vector<double>> F(t_rule.size(), std::vector<double>(s_rule.size()));
    double fscale = 0.0;
    for (std::size_t i = 0; i < t_rule.size(); ++i)
        for (std::size_t b = 0; b < s_rule.size(); ++b) {
            F[i][b] = f(SurfacePoint(UnitVector(s_rule.points[b]), t_rule.nodes[i]));
            fscale = std::max(fscale, std::abs(F[i][b]));
        }

    std::vector<SurfaceChannel> channels;
    for (int m = 0; m <= mmax; ++m) {
        const int L = sph_harmonic_count(w.d, m);
        JacobiParams jp(2.0 * m + w.d - 2.0, w.gamma);
        // shifted-Jacobi values at the t-nodes, shared across ell
        std::vector<std::vector<double>> P(t_rule.size());
        bool have_p = false;
        for (int ell = 1; ell <= L; ++ell) {
            // sphere projection a(t_i) = (1/sigma) Int f(t_i xi) Y dsigma
            std::vector<double> yv(s_rule.size());
            for (std::size_t b = 0; b < s_rule.size(); ++b)
                yv[b] = sph_harmonic_eval(w.d, m, ell, UnitVector(s_rule.points[b]));
            std::vector<double> a(t_rule.size());
            double amax = 0.0;
            for (std::size_t i = 0; i < t_rule.size(); ++i) {
                double s = 0.0;
                for (std::size_t b = 0; b < s_rule.size(); ++b)
                    s += s_rule.weights[b] * F[i][b] * yv[b];
                a[i] = s / sigma;
                amax = std::max(amax, std::abs(a[i]));
            }
            if (amax <= opt.prune_tol * (1.0 + fscale)) continue;
            if (!have_p) {
                for (std::size_t i = 0; i < t_rule.size(); ++i)
                    P[i] = jacobi_eval_all(jp, K - m, 1.0 - 2.0 * t_rule.nodes[i]);
                have_p = true;
            }
            SurfaceChannel ch;
            ch.m = m;
            ch.ell = ell;
            ch.coef.resize(K - m + 1);
            for (int j = 0; j <= K - m; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < t_rule.size(); ++i)
                    s += t_rule.weights[i] * a[i] * P[i][j] * std::pow(t_rule.nodes[i], m);
                ch.coef[j] = s / t_rule.total_mass / surface_basis_norm2(w, m + j, m);
            }
            channels.push_back(std::move(ch));
        }
    }
    SurfaceSeries out(w, std::move(channels));
    out.max_degree_ = K;  // keep the analysis resolution even if channels truncate
    return out;
}

double SurfaceSeries::eval(const std::vector<double>& hat, const SurfacePoint& p) const {
    double total = 0.0;
    int cur_m = -1;
    std::vector<double> pt;
    for (const auto& ch : channels_) {
        if (ch.m != cur_m) {
            cur_m = ch.m;
            JacobiParams jp(2.0 * cur_m + w_.d - 2.0, w_.gamma);
            pt = jacobi_eval_all(jp, max_degree_ - cur_m, 1.0 - 2.0 * p.t);
        }
        double inner = 0.0;
        for (std::size_t j = 0; j < ch.coef.size(); ++j) {
            const int k = ch.m + static_cast<int>(j);
            const double hk = k < static_cast<int>(hat.size()) ? hat[k] : 0.0;
            if (hk != 0.0) inner += hk * ch.coef[j] * pt[j];
        }
        if (inner != 0.0)
            total += inner * std::pow(p.t, ch.m) * sph_harmonic_eval(w_.d, ch.m, ch.ell, p.xi);
    }
    return total;
}

double SurfaceSeries::eval_full(const SurfacePoint& p) const {
    std::vector<double> ones(max_degree_ + 1, 1.0);
    return eval(ones, p);
}

double SurfaceSeries::eval_dt(const std::vector<double>& hat, int r,
                              const SurfacePoint& p) const {
    double total = 0.0;
    const double y = 1.0 - 2.0 * p.t;
    for (const auto& ch : channels_) {
        JacobiParams jp(2.0 * ch.m + w_.d - 2.0, w_.gamma);
        double inner = 0.0;
        for (std::size_t j = 0; j < ch.coef.size(); ++j) {
            const int k = ch.m + static_cast<int>(j);
            const double hk = k < static_cast<int>(hat.size()) ? hat[k] : 0.0;
            if (hk == 0.0 || ch.coef[j] == 0.0) continue;
            // d_t^r [ P_j(1-2t) t^m ] by the product rule
            double term = 0.0;
            for (int q = 0; q <= r; ++q) {
                const double fall = falling(ch.m, r - q);
                if (fall == 0.0 && r - q > 0) continue;
                const double pq = jacobi_deriv(jp, static_cast<int>(j), q, y);
                const double sign = (q % 2) ? -1.0 : 1.0;
                term += binom_real(r, q) * sign * std::pow(2.0, q) * pq * fall *
                        std::pow(p.t, ch.m - (r - q));
            }
            inner += hk * ch.coef[j] * term;
        }
        if (inner != 0.0) total += inner * sph_harmonic_eval(w_.d, ch.m, ch.ell, p.xi);
    }
    return total;
}

double SurfaceSeries::eval_dphi(const std::vector<double>& hat, int r,
                                const SurfacePoint& p) const {
    if (w_.d != 2)
        throw capability_error("SurfaceSeries::eval_dphi: analytic route requires d = 2");
    const double phi = std::atan2(p.xi[1], p.xi[0]);
    double total = 0.0;
    int cur_m = -1;
    std::vector<double> pt;
    for (const auto& ch : channels_) {
        if (ch.m == 0) continue;  // constants in phi vanish under d/dphi
        if (ch.m != cur_m) {
            cur_m = ch.m;
            JacobiParams jp(2.0 * cur_m + w_.d - 2.0, w_.gamma);
            pt = jacobi_eval_all(jp, max_degree_ - cur_m, 1.0 - 2.0 * p.t);
        }
        double inner = 0.0;
        for (std::size_t j = 0; j < ch.coef.size(); ++j) {
            const int k = ch.m + static_cast<int>(j);
            const double hk = k < static_cast<int>(hat.size()) ? hat[k] : 0.0;
            if (hk != 0.0) inner += hk * ch.coef[j] * pt[j];
        }
        if (inner == 0.0) continue;
        const double arg = ch.m * phi + r * M_PI / 2.0;
        const double y = (ch.ell == 1 ? std::cos(arg) : std::sin(arg)) / std::sqrt(M_PI);
        total += inner * std::pow(p.t, ch.m) * std::pow(static_cast<double>(ch.m), r) * y;
    }
    return total;
}

double SurfaceSeries::proj_norm2(int k) const {
    double s = 0.0;
    for (const auto& ch : channels_) {
        const int j = k - ch.m;
        if (j < 0 || j >= static_cast<int>(ch.coef.size())) continue;
        s += ch.coef[j] * ch.coef[j] * surface_basis_norm2(w_, k, ch.m);
    }
    return s;
}

double SurfaceSeries::tail_norm(int n) const {
    double s = 0.0;
    for (int k = n + 1; k <= max_degree_; ++k) s += proj_norm2(k);
    return std::sqrt(std::max(0.0, s));
}

std::vector<double> cutoff_hat(int n, int kmax, CutoffSpec cutoff) {
    std::vector<double> hat(kmax + 1, 0.0);
    if (n == 0) {
        hat[0] = 1.0;
        return hat;
    }
    for (int k = 0; k <= kmax && k <= 2 * n; ++k)
        hat[k] = cutoff(static_cast<double>(k) / n);
    return hat;
}

double best_approx_l2(const SurfaceField& f, const SurfaceWeight& w, int n, int max_degree,
                      const SurfaceAnalyzeOptions& opt) {
    if (max_degree <= n)
        throw std::invalid_argument("best_approx_l2: resolution must exceed n");
    SurfaceSeries series = SurfaceSeries::analyze(f, w, max_degree, opt);
    return series.tail_norm(n);
}

double best_approx_surrogate(const SurfaceField& f, const SurfaceWeight& w, int n, double p,
                             int max_degree, const SurfaceAnalyzeOptions& opt) {
    const int half = n / 2;
    if (max_degree < 2 * half + 1)
        throw std::invalid_argument("best_approx_surrogate: resolution too small");
    auto series = std::make_shared<SurfaceSeries>(SurfaceSeries::analyze(f, w, max_degree, opt));
    std::vector<double> hat = cutoff_hat(half, max_degree);
    auto diff = [series, hat, &f](const SurfacePoint& q) {
        return f(q) - series->eval(hat, q);
    };
    return surface_norm(diff, w, p);
}

double surface_norm(const SurfaceField& f, const SurfaceWeight& w, double p,
                    const SurfaceModulusOptions& opt) {
    if (std::isinf(p)) {
        SphericalQuadrature grid = spherical_quadrature(w.d, opt.sphere_degree);
        double m = 0.0;
        for (int i = 0; i < opt.sup_t; ++i) {
            const double t = (i + 0.5) / opt.sup_t;
            for (const auto& xi : grid.points)
                m = std::max(m, std::abs(f(SurfacePoint(UnitVector(xi), t))));
        }
        return m;
    }
    QuadratureRule t_rule = gauss_jacobi_rule01(w.t_params(), opt.t_quad);
    SphericalQuadrature s_rule = spherical_quadrature(w.d, opt.sphere_degree);
    const double sigma = sphere_surface_area(w.d);
    double total = 0.0;
    for (std::size_t i = 0; i < t_rule.size(); ++i) {
        const double t = t_rule.nodes[i];
        double inner = 0.0;
        for (std::size_t b = 0; b < s_rule.size(); ++b)
            inner += s_rule.weights[b] *
                     std::pow(std::abs(f(SurfacePoint(UnitVector(s_rule.points[b]), t))), p);
        total += t_rule.weights[i] * inner;
    }
    return std::pow(total / (t_rule.total_mass * sigma), 1.0 / p);
}

namespace {

// radial difference Delta^r_{theta phi} along s -> f(s xi, s), zero when the
// stencil leaves [0,1]
double radial_difference(const SurfaceField& f, const UnitVector& xi, int r, double theta,
                         double t) {
    const double step = theta * phi_fn(t);
    const double half = 0.5 * r * step;
    if (t - half < 0.0 || t + half > 1.0) return 0.0;
    double s = 0.0;
    for (int j = 0; j <= r; ++j) {
        const double sign = (j % 2) ? -1.0 : 1.0;
        s += sign * binom_real(r, j) * f(SurfacePoint(xi, t + (0.5 * r - j) * step));
    }
    return s;
}

// Euler difference Delta^r_{i,j,theta/sqrt(t)} acting on xi at fixed t
double euler_surface_difference(const SurfaceField& f, const SurfacePoint& p, int i, int j,
                                int r, double theta_over_sqrt_t) {
    auto g = [&](const Eigen::VectorXd& v) { return f(SurfacePoint(UnitVector(v), p.t)); };
    return euler_difference(g, RotationSpec{i, j, theta_over_sqrt_t}, r, p.xi.coords);
}

double lattice_sup(const SurfaceWeight& w, const SurfaceModulusOptions& opt, double lo,
                   double hi, const std::function<double(const SurfacePoint&)>& g) {
    SphericalQuadrature grid = spherical_quadrature(w.d, opt.sphere_degree);
    double m = 0.0;
    for (int i = 0; i < opt.sup_t; ++i) {
        const double t = lo + (hi - lo) * (i + 0.5) / opt.sup_t;
        for (const auto& xi : grid.points)
            m = std::max(m, std::abs(g(SurfacePoint(UnitVector(xi), t))));
    }
    return m;
}

double weighted_lp(const SurfaceWeight& w, const SurfaceModulusOptions& opt, double p,
                   double lo, double hi, bool restrict_t,
                   const std::function<double(const SurfacePoint&)>& g) {
    // L^p against the normalized surface measure, t restricted to [lo,hi]
    SphericalQuadrature s_rule = spherical_quadrature(w.d, opt.sphere_degree);
    const double sigma = sphere_surface_area(w.d);
    double total = 0.0;
    if (restrict_t) {
        QuadratureRule t_rule = gauss_legendre_rule(opt.t_quad, lo, hi);
        const JacobiParams tp = w.t_params();
        for (std::size_t i = 0; i < t_rule.size(); ++i) {
            const double t = t_rule.nodes[i];
            const double wt = t_rule.weights[i] * std::pow(t, tp.alpha) *
                              std::pow(1.0 - t, tp.beta) / w.t_mass();
            double inner = 0.0;
            for (std::size_t b = 0; b < s_rule.size(); ++b)
                inner += s_rule.weights[b] *
                         std::pow(std::abs(g(SurfacePoint(UnitVector(s_rule.points[b]), t))), p);
            total += wt * inner;
        }
    } else {
        QuadratureRule t_rule = gauss_jacobi_rule01(w.t_params(), opt.t_quad);
        for (std::size_t i = 0; i < t_rule.size(); ++i) {
            const double t = t_rule.nodes[i];
            double inner = 0.0;
            for (std::size_t b = 0; b < s_rule.size(); ++b)
                inner += s_rule.weights[b] *
                         std::pow(std::abs(g(SurfacePoint(UnitVector(s_rule.points[b]), t))), p);
            total += t_rule.weights[i] / t_rule.total_mass * inner;
        }
    }
    return std::pow(total / sigma, 1.0 / p);
}

}  // namespace

double surface_euler_component(const SurfaceField& f, const SurfaceWeight& w, int r,
                               double theta, double p, int i, int j,
                               const SurfaceModulusOptions& opt) {
    auto gb = [&](const SurfacePoint& pt) {
        return euler_surface_difference(f, pt, i, j, r, theta / std::sqrt(pt.t));
    };
    return std::isinf(p) ? lattice_sup(w, opt, 0.0, 1.0, gb)
                         : weighted_lp(w, opt, p, 0.0, 1.0, false, gb);
}

double surface_radial_component(const SurfaceField& f, const SurfaceWeight& w, int r,
                                double theta, double p, double lo, double hi,
                                const SurfaceModulusOptions& opt) {
    if (!(lo < hi)) throw degenerate_input_error("surface_radial_component: empty t-interval");
    auto ga = [&](const SurfacePoint& pt) {
        return radial_difference(f, pt.xi, r, theta, pt.t);
    };
    return std::isinf(p) ? lattice_sup(w, opt, lo, hi, ga)
                         : weighted_lp(w, opt, p, lo, hi, true, ga);
}

std::pair<double, double> surface_modulus_parts(const SurfaceField& f, const SurfaceWeight& w,
                                                int r, double h, double p,
                                                const SurfaceModulusOptions& opt) {
    if (r < 1) throw std::invalid_argument("surface_modulus: r >= 1 required");
    if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("surface_modulus: h in (0,1]");
    const double margin = opt.rho * r * r * h * h;
    if (!(margin < 0.5)) throw degenerate_input_error("surface_modulus: empty t-interval");
    const double lo = margin, hi = 1.0 - margin;

    double omega_a = 0.0, omega_b = 0.0;
    for (int q = 0; q < opt.theta_points; ++q) {
        const double theta = h * std::pow(2.0, -0.5 * q);
        omega_a = std::max(omega_a, surface_radial_component(f, w, r, theta, p, lo, hi, opt));
        for (int i = 1; i <= w.d; ++i)
            for (int j = i + 1; j <= w.d; ++j)
                omega_b = std::max(omega_b, surface_euler_component(f, w, r, theta, p, i, j, opt));
    }
    return {omega_a, omega_b};
}

double surface_modulus(const SurfaceField& f, const SurfaceWeight& w, int r, double h, double p,
                       const SurfaceModulusOptions& opt) {
    auto parts = surface_modulus_parts(f, w, r, h, p, opt);
    return parts.first + parts.second;
}

double surface_kfunctional(const SurfaceField& f, const SurfaceWeight& w, int r, double h,
                           double p, const std::vector<SurfaceKCandidate>& candidates,
                           const SurfaceModulusOptions& opt) {
    if (r < 1 || r > 2)
        throw std::invalid_argument("surface_kfunctional: r must be 1 or 2");
    if (candidates.empty())
        throw configuration_error("surface_kfunctional: candidate list must be nonempty");
    const double hr = std::pow(h, r);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cand : candidates) {
        if (!cand.g || !cand.dt_r || !cand.dij_r)
            throw capability_error("surface_kfunctional: candidate lacks derivatives");
        auto diff = [&](const SurfacePoint& q) { return f(q) - cand.g(q); };
        double value = surface_norm(diff, w, p, opt);
        auto smooth_t = [&](const SurfacePoint& q) {
            return std::pow(phi_fn(q.t), r) * cand.dt_r(q);
        };
        value += hr * surface_norm(smooth_t, w, p, opt);
        double worst = 0.0;
        for (int i = 1; i <= w.d; ++i) {
            for (int j = i + 1; j <= w.d; ++j) {
                auto smooth_e = [&](const SurfacePoint& q) {
                    return std::pow(q.t, -0.5 * r) * cand.dij_r(i, j, q);
                };
                worst = std::max(worst, surface_norm(smooth_e, w, p, opt));
            }
        }
        value += hr * worst;
        best = std::min(best, value);
    }
    return best;
}

std::vector<SurfaceKCandidate> surface_default_candidates(const SurfaceField& f,
                                                          const SurfaceWeight& w, int r,
                                                          int jmax, CutoffSpec cutoff) {
    std::vector<SurfaceKCandidate> out;
    for (int j = 0; j <= jmax; ++j) {
        const int n = 1 << j;
        auto series =
            std::make_shared<SurfaceSeries>(SurfaceSeries::analyze(f, w, 2 * n + 1));
        auto hat = std::make_shared<std::vector<double>>(
            cutoff_hat(n, series->max_degree(), cutoff));
        SurfaceKCandidate cand;
        cand.g = [series, hat](const SurfacePoint& q) { return series->eval(*hat, q); };
        cand.dt_r = [series, hat, r](const SurfacePoint& q) {
            return series->eval_dt(*hat, r, q);
        };
        if (w.d == 2) {
            cand.dij_r = [series, hat, r](int, int, const SurfacePoint& q) {
                return series->eval_dphi(*hat, r, q);
            };
        } else {
            cand.dij_r = [series, hat, r](int i, int j, const SurfacePoint& q) {
                auto g = [&](const Eigen::VectorXd& v) {
                    return series->eval(*hat, SurfacePoint(UnitVector(v), q.t));
                };
                return angular_derivative(g, i, j, r, q.xi.coords);
            };
        }
        out.push_back(std::move(cand));
    }
    return out;
}

namespace {

// central difference with a fixed step h (zero when the stencil leaves [0,1])
double fixed_radial_difference(const SurfaceField& f, const UnitVector& xi, int r, double h,
                               double t) {
    const double half = 0.5 * r * h;
    if (t - half < 0.0 || t + half > 1.0) return 0.0;
    double s = 0.0;
    for (int j = 0; j <= r; ++j) {
        const double sign = (j % 2) ? -1.0 : 1.0;
        s += sign * binom_real(r, j) * f(SurfacePoint(xi, t + (0.5 * r - j) * h));
    }
    return s;
}

}  // namespace

double commutation_check(const SurfaceKernelEvaluator& ev, const SurfaceField& f,
                         CommutationKind kind, const CommutationParams& params,
                         const std::vector<SurfacePoint>& samples, const SurfaceRules& rules) {
    auto lnf = [&](const SurfacePoint& q) { return nearbest_apply(ev, f, q, rules); };
    double worst = 0.0;
    for (const auto& p : samples) {
        double lhs, rhs;
        if (kind == CommutationKind::radial_difference) {
            // the step theta*phi(t) is frozen at the evaluation point; the
            // radial difference commutes through the ray-wise companion
            // operator (a fixed shift leaves the surface polynomial space,
            // so the full operator only commutes up to an O(theta) defect)
            const double h = params.theta * phi_fn(p.t);
            auto gnf = [&](const SurfacePoint& q) { return gn_apply(ev, f, q, rules.t_rule); };
            lhs = fixed_radial_difference(gnf, p.xi, params.r, h, p.t);
            auto df = [&](const SurfacePoint& q) {
                return fixed_radial_difference(f, q.xi, params.r, h, q.t);
            };
            rhs = gn_apply(ev, df, p, rules.t_rule);
        } else {
            lhs = euler_surface_difference(lnf, p, params.i, params.j, params.r, params.theta);
            auto df = [&](const SurfacePoint& q) {
                return euler_surface_difference(f, q, params.i, params.j, params.r,
                                                params.theta);
            };
            rhs = nearbest_apply(ev, df, p, rules);
        }
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

double bernstein_ratio(const SurfaceWeight& w, int n, int r, int trials, std::uint64_t seed,
                       const SurfaceModulusOptions& opt) {
    std::mt19937_64 eng(seed);
    auto normal = [&]() {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double a = u(eng), b = u(eng);
        if (a < 1e-300) a = 1e-300;
        return std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * M_PI * b);
    };
    const double nr = std::pow(static_cast<double>(n), r);
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<SurfaceChannel> channels;
        for (int m = 0; m <= n; ++m) {
            for (int ell = 1; ell <= sph_harmonic_count(w.d, m); ++ell) {
                SurfaceChannel ch;
                ch.m = m;
                ch.ell = ell;
                ch.coef.resize(n - m + 1);
                for (double& c : ch.coef) c = normal();
                channels.push_back(std::move(ch));
            }
        }
        auto series = std::make_shared<SurfaceSeries>(w, std::move(channels));
        double norm2 = 0.0;
        for (int k = 0; k <= n; ++k) norm2 += series->proj_norm2(k);
        const double fnorm = std::sqrt(norm2);
        std::vector<double> ones(n + 1, 1.0);

        auto smooth_t = [&](const SurfacePoint& q) {
            return std::pow(phi_fn(q.t), r) * series->eval_dt(ones, r, q);
        };
        double ratio_t = surface_norm(smooth_t, w, 2.0, opt) / (nr * fnorm);

        double ratio_e = 0.0;
        for (int i = 1; i <= w.d; ++i) {
            for (int j = i + 1; j <= w.d; ++j) {
                auto smooth_e = [&](const SurfacePoint& q) {
                    double dv;
                    if (w.d == 2) {
                        dv = series->eval_dphi(ones, r, q);
                    } else {
                        auto g = [&](const Eigen::VectorXd& v) {
                            return series->eval(ones, SurfacePoint(UnitVector(v), q.t));
                        };
                        dv = angular_derivative(g, i, j, r, q.xi.coords);
                    }
                    return std::pow(q.t, -0.5 * r) * dv;
                };
                ratio_e = std::max(ratio_e, surface_norm(smooth_e, w, 2.0, opt) / (nr * fnorm));
            }
        }
        worst = std::max(worst, std::max(ratio_t, ratio_e));
    }
    return worst;
}

}  // namespace conic
