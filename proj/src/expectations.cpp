#include "truncgeo/expectations.hpp"

#include <algorithm>
#include <cmath>

#include "truncgeo/errors.hpp"

namespace truncgeo {

double expect(const ModelSpec& m, const ParamPoint& p, const std::function<double(double)>& f,
              const QuadratureConfig& cfg, bool force_rational) {
    m.check_point(p);
    if (m.quantile && !force_rational) {
        return integrate([&](double u) { return f(m.quantile(u, p)); }, 0.0, 1.0, cfg).value;
    }
    const double psi = psi_value(m, p, cfg);
    const double hi = m.trunc_interval.hi;
    if (std::isfinite(hi)) {
        return integrate([&](double u) {
            const double x = p.gamma + (hi - p.gamma) * u;
            return f(x) * std::exp(m.log_q(x, p) - psi) * (hi - p.gamma);
        }, 0.0, 1.0, cfg).value;
    }
    const double scale = m.tail_scale ? m.tail_scale(p) : 1.0;
    return integrate([&](double u) {
        const double om = 1 - u;
        const double x = p.gamma + scale * u / om;
        const double ld = m.log_q(x, p) - psi;
        if (!std::isfinite(ld)) return 0.0;
        const double w = std::exp(ld) * scale / (om * om);
        return w > 0 ? f(x) * w : 0.0;
    }, 0.0, 1.0, cfg).value;
}

namespace {

// Fill every permutation of a sorted component tuple with the same value.
void scatter(ATensor& t, std::vector<int> tuple, double value) {
    std::sort(tuple.begin(), tuple.end());
    do {
        t.data[flat_index(tuple, t.d)] = value;
    } while (std::next_permutation(tuple.begin(), tuple.end()));
}

}  // namespace

ATensor a_tensor(const ModelSpec& m, const ParamPoint& p, int r, int s,
                 const QuadratureConfig& cfg, ATensorMode mode) {
    m.check_point(p);
    if (r < 0 || s < 0 || r + s > 4) throw DomainError("a_tensor: need r, s >= 0 and r + s <= 4");
    ATensor out(m.d, r, s);
    if (r == 0 && s == 0) throw DomainError("a_tensor: order zero has no meaning here");

    // Iterate non-decreasing component tuples; entries are symmetric in the
    // theta slots because partial derivatives commute.
    std::vector<int> tuple(r, 0);
    for (;;) {
        std::vector<int> orders(m.d, 0);
        for (int c : tuple) ++orders[c];

        double value;
        const bool x_free = s >= 1 || (m.is_otef && r >= 2);
        if (mode == ATensorMode::Auto && x_free) {
            value = -psi_partial(m, p, orders, s, cfg);
        } else {
            value = expect(m, p, [&](double x) {
                // quadrature nodes can land a rounding error away from gamma
                if (x <= p.gamma) x = std::nextafter(p.gamma, m.trunc_interval.hi);
                return log_density_partial(m, x, p, orders, s, cfg);
            }, cfg);
        }
        if (r == 0) {
            out.data[0] = value;
            break;
        }
        scatter(out, tuple, value);

        int k = r - 1;
        while (k >= 0 && tuple[k] == m.d - 1) --k;
        if (k < 0) break;
        const int v = tuple[k] + 1;
        for (int j = k; j < r; ++j) tuple[j] = v;
    }
    return out;
}

double c_value(const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg) {
    return a_tensor(m, p, 0, 1, cfg).data[0];
}

double expect_partial_product(const ModelSpec& m, const ParamPoint& p,
                              const std::vector<std::pair<std::vector<int>, int>>& factors,
                              const QuadratureConfig& cfg) {
    return expect(m, p, [&](double x) {
        if (x <= p.gamma) x = std::nextafter(p.gamma, m.trunc_interval.hi);
        double prod = 1;
        for (const auto& [orders, g] : factors)
            prod *= log_density_partial(m, x, p, orders, g, cfg);
        return prod;
    }, cfg);
}

}  // namespace truncgeo
