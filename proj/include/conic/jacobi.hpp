#ifndef CONIC_JACOBI_HPP
#define CONIC_JACOBI_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace conic {

// Thrown when (alpha, beta) leaves the integrability range alpha,beta > -1.
struct parameter_domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an eigen/iterative solver fails to converge.
struct numerical_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct JacobiParams {
    double alpha;
    double beta;

    JacobiParams(double a, double b) : alpha(a), beta(b) {
        if (!(a > -1.0) || !(b > -1.0))
            throw parameter_domain_error("JacobiParams: need alpha > -1 and beta > -1, got alpha=" +
                                         std::to_string(a) + " beta=" + std::to_string(b));
    }
};

// Node/weight list with declared polynomial exactness degree.
struct QuadratureRule {
    std::vector<double> nodes;    // strictly increasing
    std::vector<double> weights;  // all positive
    int exact_degree = 0;
    double total_mass = 0.0;      // integral of 1 against the rule's weight

    std::size_t size() const { return nodes.size(); }

    template <typename F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }
};

// Rising factorial (a)_n computed iteratively in floating point.
double pochhammer(double a, int n);

// P_n^{(alpha,beta)}(t) by the forward three-term recurrence, t in [-1,1].
double jacobi_eval(const JacobiParams& p, int n, double t);

// All of P_0..P_n at t in one recurrence sweep.
std::vector<double> jacobi_eval_all(const JacobiParams& p, int n, double t);

// r-th derivative of P_n^{(alpha,beta)} at t (d/dt P_n = (n+a+b+1)/2 * P_{n-1}^{(a+1,b+1)}).
double jacobi_deriv(const JacobiParams& p, int n, int r, double t);

// P_n^{(alpha,beta)}(1) = (alpha+1)_n / n!.
double jacobi_at_one(const JacobiParams& p, int n);

// h_n^{(alpha,beta)}: squared L2 norm of P_n against the probability-normalized
// Jacobi measure on [-1,1]; h_0 == 1 exactly.
double jacobi_norm(const JacobiParams& p, int n);

// Z_n^{(alpha,beta)}(t) = P_n(t) P_n(1) / h_n.
double zn_kernel(const JacobiParams& p, int n, double t);

// Euler beta function B(a,b) for a,b > 0.
double beta_function(double a, double b);

// Gauss-Jacobi rule on [-1,1] for weight (1-t)^alpha (1+t)^beta.
// Exact for polynomials of degree <= 2*num_nodes - 1.
QuadratureRule gauss_jacobi_rule(const JacobiParams& p, int num_nodes);

// Companion rule on [0,1] for the weight t^alpha (1-t)^beta, obtained from the
// [-1,1] rule by the affine map t -> (1 - s)/2 (i.e. s = 1 - 2t).
QuadratureRule gauss_jacobi_rule01(const JacobiParams& p, int num_nodes);

// Gauss-Legendre rule on [a,b] (weight 1).
QuadratureRule gauss_legendre_rule(int num_nodes, double a = -1.0, double b = 1.0);

}  // namespace conic

#endif
