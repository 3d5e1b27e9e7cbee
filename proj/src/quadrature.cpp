#include "truncgeo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>

#include "truncgeo/errors.hpp"

namespace truncgeo {

namespace {

GaussRule make_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Roots of the Legendre polynomial by Newton from the Chebyshev guess.
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1 || n > 128) throw DomainError("gauss_legendre: order out of range");
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
    return it->second;
}

namespace {

struct Panel {
    double a, b;
    double value;   // 21-point estimate
    double error;   // |I21 - I10|
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel eval_panel(const std::function<double(double)>& f, double a, double b) {
    static const GaussRule& lo = gauss_legendre(10);
    static const GaussRule& hi = gauss_legendre(21);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double i10 = 0, i21 = 0;
    for (int k = 0; k < 10; ++k) {
        const double v = f(mid + half * lo.nodes[k]);
        if (!std::isfinite(v)) throw Error("integrate: non-finite integrand value");
        i10 += lo.weights[k] * v;
    }
    for (int k = 0; k < 21; ++k) {
        const double v = f(mid + half * hi.nodes[k]);
        if (!std::isfinite(v)) throw Error("integrate: non-finite integrand value");
        i21 += hi.weights[k] * v;
    }
    i10 *= half;
    i21 *= half;
    return {a, b, i21, std::fabs(i21 - i10)};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadratureConfig& cfg) {
    if (!(a <= b)) throw DomainError("integrate: inverted interval");
    if (a == b) return {0, 0, 0};

    std::priority_queue<Panel> panels;
    panels.push(eval_panel(f, a, b));
    double total = panels.top().value;
    double err = panels.top().error;
    int splits = 0;

    auto tol = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total)); };

    while (err > tol()) {
        if (splits >= cfg.max_subdivisions)
            throw QuadratureError("integrate: tolerance not reached", total, err);
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Panel left = eval_panel(f, worst.a, mid);
        Panel right = eval_panel(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++splits;
    }
    return {total, err, splits};
}

}  // namespace truncgeo
