#ifndef CONIC_CUTOFF_HPP
#define CONIC_CUTOFF_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace conic {

// Admissible C^inf cut-off: >= 0, == 1 on [0,1], == 0 on [2,inf),
// non-increasing on [1,2].
enum class CutoffKind {
    smooth_exponential_bump,  // e^{-1/u} glue on (1,2); C^inf
    raised_cosine             // (1 + cos(pi (t-1)))/2 on (1,2); C^1
};

inline CutoffKind cutoff_from_name(const std::string& name) {
    if (name == "smooth-exponential-bump") return CutoffKind::smooth_exponential_bump;
    if (name == "raised-cosine") return CutoffKind::raised_cosine;
    throw std::invalid_argument("unknown cutoff kind: " + name);
}

inline std::string cutoff_name(CutoffKind k) {
    return k == CutoffKind::smooth_exponential_bump ? "smooth-exponential-bump"
                                                    : "raised-cosine";
}

inline double cutoff_eval(CutoffKind kind, double t) {
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    if (kind == CutoffKind::raised_cosine)
        return 0.5 * (1.0 + std::cos(M_PI * (t - 1.0)));
    auto sig = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
    const double up = sig(2.0 - t);
    const double dn = sig(t - 1.0);
    return up / (up + dn);
}

struct CutoffSpec {
    CutoffKind kind = CutoffKind::smooth_exponential_bump;
    double operator()(double t) const { return cutoff_eval(kind, t); }
};

}  // namespace conic

#endif
