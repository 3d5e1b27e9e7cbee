#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "truncgeo/errors.hpp"

namespace truncgeo::fd {

// Central-difference step for a derivative whose total order is `order`,
// scaled by the magnitude of the coordinate being perturbed. First-order
// steps are small; higher orders need wider stencils or roundoff in the
// h^order denominator swamps the result, so those are paired with one level
// of Richardson extrapolation in partial() below.
inline double step(int order, double x) {
    static constexpr double base[4] = {1e-5, 6e-4, 3e-3, 1.2e-2};
    if (order < 1 || order > 4) throw DomainError("fd::step: order must be in 1..4");
    return base[order - 1] * std::max(1.0, std::fabs(x));
}

using ScalarFn = std::function<double(const std::vector<double>&)>;

namespace detail {

// One central stencil along coordinate `k`, derivative order `ord`, step `h`.
// `rest` evaluates the remaining (already reduced) function.
inline double stencil(const ScalarFn& f, std::vector<double>& pt, std::size_t k,
                      int ord, double h) {
    auto at = [&](double dx) {
        const double save = pt[k];
        pt[k] = save + dx;
        const double v = f(pt);
        pt[k] = save;
        return v;
    };
    switch (ord) {
        case 1: return (at(h) - at(-h)) / (2 * h);
        case 2: return (at(h) - 2 * at(0) + at(-h)) / (h * h);
        case 3: return (at(2 * h) - 2 * at(h) + 2 * at(-h) - at(-2 * h)) / (2 * h * h * h);
        case 4: return (at(2 * h) - 4 * at(h) + 6 * at(0) - 4 * at(-h) + at(-2 * h)) / (h * h * h * h);
        default: throw DomainError("fd: derivative order must be in 1..4");
    }
}

}  // namespace detail

// Mixed central partial derivative of f at `point`. orders[k] is the
// derivative order in coordinate k (zeros allowed); the total must be <= 4.
// Steps are chosen from the total order; for total order >= 2 the h and h/2
// stencils are combined (Richardson) to knock out the leading h^2 error.
inline double partial(const ScalarFn& f, const std::vector<double>& point,
                      const std::vector<int>& orders) {
    if (orders.size() != point.size())
        throw DomainError("fd::partial: orders/point size mismatch");
    int total = 0;
    for (int o : orders) {
        if (o < 0) throw DomainError("fd::partial: negative order");
        total += o;
    }
    if (total == 0) return f(point);
    if (total > 4) throw DomainError("fd::partial: total order must be <= 4");

    // Reduce one differentiated coordinate at a time, innermost first.
    std::function<double(std::vector<double>&, std::size_t, double)> reduce =
        [&](std::vector<double>& pt, std::size_t k, double scale) -> double {
            while (k < orders.size() && orders[k] == 0) ++k;
            if (k == orders.size()) return f(pt);
            ScalarFn inner = [&, k](const std::vector<double>& q) {
                std::vector<double> copy = q;
                return reduce(copy, k + 1, scale);
            };
            return detail::stencil(inner, pt, k, orders[k],
                                   scale * step(total, point[k]));
        };

    std::vector<double> pt = point;
    const double full = reduce(pt, 0, 1.0);
    if (total == 1) return full;
    const double half = reduce(pt, 0, 0.5);
    return (4.0 * half - full) / 3.0;
}

}  // namespace truncgeo::fd
