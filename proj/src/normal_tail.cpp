#include "truncgeo/normal_tail.hpp"

#include <cmath>

#include "truncgeo/errors.hpp"

namespace truncgeo {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
}  // namespace

double norm_pdf(double v) { return std::exp(-0.5 * v * v - kLogSqrt2Pi); }

double norm_cdf(double v) { return 0.5 * std::erfc(-v * kInvSqrt2); }

double norm_ccdf(double v) { return 0.5 * std::erfc(v * kInvSqrt2); }

double psi_tail(double v) {
    const double tail = norm_ccdf(v);
    if (tail <= 0) throw DomainError("psi_tail: upper tail underflows");
    return std::log(tail);
}

double hazard(double v) {
    // exp(log phi - Psi) stays finite far into the right tail where both
    // factors underflow individually.
    return std::exp(-0.5 * v * v - kLogSqrt2Pi - psi_tail(v));
}

double psi_tail_d1(double v) { return -hazard(v); }

double psi_tail_d2(double v) {
    const double lam = hazard(v);
    return v * lam - lam * lam;
}

double psi_tail_d3(double v) {
    const double lam = hazard(v);
    return (1 - v * v) * lam + 3 * v * lam * lam - 2 * lam * lam * lam;
}

double psi_tail_d4(double v) {
    const double lam = hazard(v);
    const double l2 = lam * lam;
    return (v * v * v - 3 * v) * lam + (4 - 7 * v * v) * l2 + 12 * v * l2 * lam - 6 * l2 * l2;
}

double norm_ccdf_inv(double p) {
    if (!(p > 0 && p < 1)) throw DomainError("norm_ccdf_inv: p must be in (0, 1)");
    // Bisection down to ~1e-11, then Newton to machine precision. The tail
    // function is monotone and well scaled, so this is dependable; speed is
    // irrelevant here (draws in the hot experiment loop use the exponential
    // model's closed quantile).
    double lo = -40, hi = 40;
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        (norm_ccdf(mid) > p ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) {
        const double fx = norm_ccdf(x) - p;
        x += fx / norm_pdf(x);
    }
    return x;
}

double norm_quantile(double p) { return -norm_ccdf_inv(p); }

}  // namespace truncgeo
