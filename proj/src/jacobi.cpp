#include "conic/jacobi.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace conic {

double pochhammer(double a, int n) {
    double v = 1.0;
    for (int k = 0; k < n; ++k) v *= a + k;
    return v;
}

double jacobi_eval(const JacobiParams& p, int n, double t) {
    const double a = p.alpha, b = p.beta;
    if (n == 0) return 1.0;
    double pm2 = 1.0;
    double pm1 = 0.5 * ((a + b + 2.0) * t + (a - b));
    if (n == 1) return pm1;
    for (int k = 2; k <= n; ++k) {
        const double apb = a + b;
        const double c1 = 2.0 * k * (k + apb) * (2.0 * k + apb - 2.0);
        const double c2 = (2.0 * k + apb - 1.0) * (2.0 * k + apb) * (2.0 * k + apb - 2.0);
        const double c3 = (2.0 * k + apb - 1.0) * (a * a - b * b);
        const double c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + apb);
        const double pk = ((c2 * t + c3) * pm1 - c4 * pm2) / c1;
        pm2 = pm1;
        pm1 = pk;
    }
    return pm1;
}

std::vector<double> jacobi_eval_all(const JacobiParams& p, int n, double t) {
    std::vector<double> out(static_cast<std::size_t>(n) + 1);
    const double a = p.alpha, b = p.beta;
    out[0] = 1.0;
    if (n == 0) return out;
    out[1] = 0.5 * ((a + b + 2.0) * t + (a - b));
    for (int k = 2; k <= n; ++k) {
        const double apb = a + b;
        const double c1 = 2.0 * k * (k + apb) * (2.0 * k + apb - 2.0);
        const double c2 = (2.0 * k + apb - 1.0) * (2.0 * k + apb) * (2.0 * k + apb - 2.0);
        const double c3 = (2.0 * k + apb - 1.0) * (a * a - b * b);
        const double c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + apb);
        out[k] = ((c2 * t + c3) * out[k - 1] - c4 * out[k - 2]) / c1;
    }
    return out;
}

double jacobi_deriv(const JacobiParams& p, int n, int r, double t) {
    if (r == 0) return jacobi_eval(p, n, t);
    if (n < r) return 0.0;
    double scale = 1.0;
    for (int j = 0; j < r; ++j) scale *= 0.5 * (n + p.alpha + p.beta + 1.0 + j);
    JacobiParams shifted(p.alpha + r, p.beta + r);
    return scale * jacobi_eval(shifted, n - r, t);
}

double jacobi_at_one(const JacobiParams& p, int n) {
    return pochhammer(p.alpha + 1.0, n) / pochhammer(1.0, n);
}

double jacobi_norm(const JacobiParams& p, int n) {
    if (n == 0) return 1.0;
    const double a = p.alpha, b = p.beta;
    // h_n = (a+1)_n (b+1)_n (a+b+n+1) / ( n! (a+b+2)_n (a+b+2n+1) ),
    // accumulated factor-by-factor so large n cannot overflow.
    double h = (a + b + n + 1.0) / (a + b + 2.0 * n + 1.0);
    for (int k = 0; k < n; ++k)
        h *= (a + 1.0 + k) * (b + 1.0 + k) / ((1.0 + k) * (a + b + 2.0 + k));
    return h;
}

double zn_kernel(const JacobiParams& p, int n, double t) {
    return jacobi_eval(p, n, t) * jacobi_at_one(p, n) / jacobi_norm(p, n);
}

double beta_function(double a, double b) {
    return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

QuadratureRule gauss_jacobi_rule(const JacobiParams& p, int num_nodes) {
    if (num_nodes < 1) throw std::invalid_argument("gauss_jacobi_rule: num_nodes >= 1 required");
    const double a = p.alpha, b = p.beta;
    const int n = num_nodes;

    // Recurrence coefficients of the monic Jacobi polynomials:
    // diag d_k (k = 0..n-1), off-diagonal e_k = sqrt(b_k) (k = 1..n-1).
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        double dk;
        if (k == 0) {
            dk = (b - a) / (a + b + 2.0);
        } else {
            const double s = 2.0 * k + a + b;
            dk = (b * b - a * a) / (s * (s + 2.0));
        }
        T(k, k) = dk;
        if (k >= 1) {
            double bk;
            if (k == 1) {
                bk = 4.0 * (1.0 + a) * (1.0 + b) /
                     ((2.0 + a + b) * (2.0 + a + b) * (3.0 + a + b));
            } else {
                const double s = 2.0 * k + a + b;
                bk = 4.0 * k * (k + a) * (k + b) * (k + a + b) /
                     (s * s * (s + 1.0) * (s - 1.0));
            }
            const double ek = std::sqrt(bk);
            T(k, k - 1) = ek;
            T(k - 1, k) = ek;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success)
        throw numerical_failure("gauss_jacobi_rule: eigensolver failed to converge");

    const double mu0 = std::pow(2.0, a + b + 1.0) * beta_function(a + 1.0, b + 1.0);

    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = es.eigenvalues()(i);
        const double q = es.eigenvectors()(0, i);
        rule.weights[i] = mu0 * q * q;
    }
    // SelfAdjointEigenSolver returns eigenvalues sorted ascending already;
    // enforce it defensively.
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int i, int j) { return rule.nodes[i] < rule.nodes[j]; });
    QuadratureRule sorted;
    sorted.nodes.resize(n);
    sorted.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        sorted.nodes[i] = rule.nodes[idx[i]];
        sorted.weights[i] = rule.weights[idx[i]];
    }
    sorted.exact_degree = 2 * n - 1;
    sorted.total_mass = mu0;
    return sorted;
}

QuadratureRule gauss_jacobi_rule01(const JacobiParams& p, int num_nodes) {
    QuadratureRule base = gauss_jacobi_rule(p, num_nodes);
    const double scale = std::pow(2.0, -(p.alpha + p.beta + 1.0));
    QuadratureRule rule;
    const int n = static_cast<int>(base.size());
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // t = (1 - s)/2 reverses the order; walk backwards to keep nodes increasing.
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = 0.5 * (1.0 - base.nodes[n - 1 - i]);
        rule.weights[i] = scale * base.weights[n - 1 - i];
    }
    rule.exact_degree = base.exact_degree;
    rule.total_mass = scale * base.total_mass;  // = B(alpha+1, beta+1)
    return rule;
}

QuadratureRule gauss_legendre_rule(int num_nodes, double a, double b) {
    QuadratureRule base = gauss_jacobi_rule(JacobiParams(0.0, 0.0), num_nodes);
    QuadratureRule rule;
    rule.nodes.resize(base.size());
    rule.weights.resize(base.size());
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < base.size(); ++i) {
        rule.nodes[i] = mid + half * base.nodes[i];
        rule.weights[i] = half * base.weights[i];
    }
    rule.exact_degree = base.exact_degree;
    rule.total_mass = b - a;
    return rule;
}

}  // namespace conic
