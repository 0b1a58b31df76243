#include "conic/cone.hpp"

#include <cmath>

namespace conic {

namespace {

double phi_fn(double t) { return std::sqrt(t * (1.0 - t)); }

}  // namespace

ConePoint::ConePoint(Eigen::VectorXd x_, double t_) : x(std::move(x_)), t(t_) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::domain_error("ConePoint: t must lie in [0,1]");
    if (x.norm() > t * (1.0 + 1e-9) + 1e-12)
        throw std::domain_error("ConePoint: ||x|| <= t required");
}

ConeWeight::ConeWeight(double gamma_, int d_) : gamma(gamma_), d(d_) {
    if (!(gamma >= 0.0)) throw parameter_domain_error("ConeWeight: gamma >= 0 required");
    if (d < 2 || d > 3) throw std::invalid_argument("ConeWeight: d must be 2 or 3");
}

double cone_phi(const ConePoint& p) {
    return std::sqrt(std::max(0.0, p.t * p.t - p.x.squaredNorm()));
}

SurfacePoint cone_lift(const ConePoint& p, int sign) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("cone_lift: sign must be +-1");
    const int d = p.d();
    Eigen::VectorXd X(d + 1);
    if (p.t <= 0.0) {
        X.setZero();
        X[d] = sign;  // the apex: any direction represents the same point
        return SurfacePoint(UnitVector(X), 0.0);
    }
    X.head(d) = p.x;
    X[d] = sign * cone_phi(p);
    return SurfacePoint(UnitVector(X), p.t);
}

SurfaceField cone_lift_field(ConeField f, int d) {
    return [f = std::move(f), d](const SurfacePoint& q) {
        Eigen::VectorXd x = q.t * q.xi.coords.head(d);
        return f(ConePoint(std::move(x), q.t));
    };
}

int cone_basis_count(int d, int n) {
    // dim V_n = C(n+d+1, n)
    double v = 1.0;
    for (int i = 0; i < n; ++i) v = v * (d + 2 + i) / (i + 1.0);
    return static_cast<int>(v + 0.5);
}

double cone_kernel_eval(const SurfaceKernelEvaluator& ev, const ConePoint& a,
                        const ConePoint& b) {
    if (a.d() != b.d())
        throw configuration_error("cone_kernel_eval: point dimension mismatch");
    if (ev.weight().d != a.d() + 1)
        throw configuration_error("cone_kernel_eval: evaluator dimension mismatch");
    const SurfacePoint A = cone_lift(a, +1);
    return ev.kernel(A, cone_lift(b, +1)) + ev.kernel(A, cone_lift(b, -1));
}

double cone_integrate(const ConeField& f, const ConeWeight& w, const QuadratureRule& t_rule,
                      const SphericalQuadrature& s_rule) {
    return surface_measure_integrate(cone_lift_field(f, w.d), w.lift_weight(), t_rule, s_rule);
}

double cone_nearbest_apply(const SurfaceKernelEvaluator& ev, const ConeField& f,
                           const ConePoint& p, const SurfaceRules& rules) {
    if (ev.weight().d != p.d() + 1)
        throw configuration_error("cone_nearbest_apply: evaluator dimension mismatch");
    return nearbest_apply(ev, cone_lift_field(f, p.d()), cone_lift(p, +1), rules);
}

double cone_norm(const ConeField& f, const ConeWeight& w, double p,
                 const SurfaceModulusOptions& opt) {
    return surface_norm(cone_lift_field(f, w.d), w.lift_weight(), p, opt);
}

ConeModulusParts cone_modulus_parts(const ConeField& f, const ConeWeight& w, int r, double h,
                                    double p, ConeRadialInterval interval,
                                    const SurfaceModulusOptions& opt) {
    if (r < 1) throw std::invalid_argument("cone_modulus: r >= 1 required");
    if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("cone_modulus: h in (0,1]");
    const double margin = interval == ConeRadialInterval::definition
                              ? (r * h) * (r * h)
                              : opt.rho * r * r * h * h;
    if (!(margin < 0.5)) throw degenerate_input_error("cone_modulus: empty t-interval");

    const SurfaceWeight sw = w.lift_weight();
    SurfaceField lf = cone_lift_field(f, w.d);
    ConeModulusParts parts;
    for (int q = 0; q < opt.theta_points; ++q) {
        const double theta = h * std::pow(2.0, -0.5 * q);
        for (int i = 1; i <= w.d; ++i) {
            for (int j = i + 1; j <= w.d; ++j)
                parts.angular = std::max(
                    parts.angular, surface_euler_component(lf, sw, r, theta, p, i, j, opt));
            parts.lifted_angular =
                std::max(parts.lifted_angular,
                         surface_euler_component(lf, sw, r, theta, p, i, w.d + 1, opt));
        }
        parts.radial = std::max(
            parts.radial,
            surface_radial_component(lf, sw, r, theta, p, margin, 1.0 - margin, opt));
    }
    return parts;
}

double cone_modulus(const ConeField& f, const ConeWeight& w, int r, double h, double p,
                    ConeRadialInterval interval, const SurfaceModulusOptions& opt) {
    return cone_modulus_parts(f, w, r, h, p, interval, opt).total();
}

double phi_derivative_identity_check(const ConeC2Field& g, int i, int r,
                                     const std::vector<ConePoint>& samples) {
    if (r < 1 || r > 2)
        throw capability_error("phi_derivative_identity_check: r must be 1 or 2");
    if (!g.f || !g.d1 || (r == 2 && !g.d2))
        throw capability_error("phi_derivative_identity_check: field lacks partials");
    double worst = 0.0;
    for (const auto& p : samples) {
        const int d = p.d();
        if (i < 1 || i > d) throw std::invalid_argument("phi_derivative_identity_check: axis");
        const double phi = cone_phi(p);
        if (phi < 1e-6) continue;  // lateral boundary: the lift chart degenerates
        double lhs;
        if (r == 1) {
            lhs = -phi * g.d1(i, p);
        } else {
            lhs = phi * phi * g.d2(i, i, p) - p.x[i - 1] * g.d1(i, p);
        }
        Eigen::VectorXd X(d + 1);
        X.head(d) = p.x;
        X[d] = phi;
        const double t = p.t;
        auto lifted = [&](const Eigen::VectorXd& V) {
            Eigen::VectorXd x = V.head(d);
            const double nx = x.norm();
            if (nx > t) x *= t / nx;  // guard round-off from the rotation
            return g.f(ConePoint(std::move(x), t));
        };
        const double rhs = angular_derivative(lifted, i, d + 1, r, X);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

double cone_kfunctional(const ConeField& f, const ConeWeight& w, int r, double h, double p,
                        const std::vector<ConeKCandidate>& candidates,
                        const SurfaceModulusOptions& opt) {
    if (r < 1 || r > 2) throw std::invalid_argument("cone_kfunctional: r must be 1 or 2");
    if (candidates.empty())
        throw configuration_error("cone_kfunctional: candidate list must be nonempty");
    const SurfaceWeight sw = w.lift_weight();
    const double hr = std::pow(h, r);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cand : candidates) {
        if (!cand.g || !cand.dt_r || !cand.dij_r || !cand.phi_dr)
            throw capability_error("cone_kfunctional: candidate lacks derivatives");
        auto diff = [&](const ConePoint& q) { return f(q) - cand.g(q); };
        double value = surface_norm(cone_lift_field(diff, w.d), sw, p, opt);
        auto smooth_t = [&](const ConePoint& q) {
            return std::pow(phi_fn(q.t), r) * cand.dt_r(q);
        };
        value += hr * surface_norm(cone_lift_field(smooth_t, w.d), sw, p, opt);
        double worst_ang = 0.0;
        for (int i = 1; i <= w.d; ++i) {
            for (int j = i + 1; j <= w.d; ++j) {
                auto smooth_a = [&](const ConePoint& q) {
                    return std::pow(q.t, -0.5 * r) * cand.dij_r(i, j, q);
                };
                worst_ang = std::max(
                    worst_ang, surface_norm(cone_lift_field(smooth_a, w.d), sw, p, opt));
            }
        }
        value += hr * worst_ang;
        double worst_phi = 0.0;
        for (int i = 1; i <= w.d; ++i) {
            auto smooth_p = [&](const ConePoint& q) {
                return std::pow(q.t, -0.5 * r) * cand.phi_dr(i, q);
            };
            worst_phi =
                std::max(worst_phi, surface_norm(cone_lift_field(smooth_p, w.d), sw, p, opt));
        }
        value += hr * worst_phi;
        best = std::min(best, value);
    }
    return best;
}

std::vector<ConeKCandidate> cone_default_candidates(const ConeField& f, const ConeWeight& w,
                                                    int r, int jmax, CutoffSpec cutoff) {
    const SurfaceWeight sw = w.lift_weight();
    SurfaceField lf = cone_lift_field(f, w.d);
    const int d = w.d;
    std::vector<ConeKCandidate> out;
    for (int j = 0; j <= jmax; ++j) {
        const int n = 1 << j;
        auto series = std::make_shared<SurfaceSeries>(SurfaceSeries::analyze(lf, sw, 2 * n + 1));
        auto hat = std::make_shared<std::vector<double>>(
            cutoff_hat(n, series->max_degree(), cutoff));
        ConeKCandidate cand;
        cand.g = [series, hat](const ConePoint& q) {
            return series->eval(*hat, cone_lift(q, +1));
        };
        cand.dt_r = [series, hat, r](const ConePoint& q) {
            return series->eval_dt(*hat, r, cone_lift(q, +1));
        };
        auto angular = [series, hat](int i, int j2, int order, const ConePoint& q) {
            SurfacePoint s = cone_lift(q, +1);
            const double t = s.t;
            auto g = [&](const Eigen::VectorXd& v) {
                return series->eval(*hat, SurfacePoint(UnitVector(v), t));
            };
            return angular_derivative(g, i, j2, order, s.xi.coords);
        };
        cand.dij_r = [angular, r](int i, int j2, const ConePoint& q) {
            return angular(i, j2, r, q);
        };
        cand.phi_dr = [angular, r, d](int i, const ConePoint& q) {
            // (Phi d_i)^r g = (-1)^r D_{i,d+1}^r g~
            const double sign = (r % 2) ? -1.0 : 1.0;
            return sign * angular(i, d + 1, r, q);
        };
        out.push_back(std::move(cand));
    }
    return out;
}

double cone_best_approx_l2(const ConeField& f, const ConeWeight& w, int n, int max_degree,
                           const SurfaceAnalyzeOptions& opt) {
    return best_approx_l2(cone_lift_field(f, w.d), w.lift_weight(), n, max_degree, opt);
}

double cone_best_approx_surrogate(const ConeField& f, const ConeWeight& w, int n, double p,
                                  int max_degree, const SurfaceAnalyzeOptions& opt) {
    return best_approx_surrogate(cone_lift_field(f, w.d), w.lift_weight(), n, p, max_degree,
                                 opt);
}

}  // namespace conic
