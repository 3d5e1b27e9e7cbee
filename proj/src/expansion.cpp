#include "truncgeo/expansion.hpp"

#include <algorithm>
#include <cmath>

#include "truncgeo/errors.hpp"
#include "truncgeo/fd.hpp"

namespace truncgeo {

namespace {

// Sample-average hat tensor (1/n) sum_j D^r d_gamma^s log p(x_j; mle). Gamma
// derivatives and, on an exponential family, theta derivatives of order >= 2
// are x-free, so only the generic regular part needs the sample loop.
ATensor hat_tensor(const ModelSpec& m, const Sample& sample, const ParamPoint& p, int r, int s,
                   const QuadratureConfig& cfg) {
    ATensor t(m.d, r, s);
    std::vector<int> tuple(static_cast<size_t>(r), 0);
    const bool x_free = s >= 1 || (m.is_otef && r >= 2);
    for (;;) {
        std::vector<int> orders(static_cast<size_t>(m.d), 0);
        for (int k : tuple) ++orders[static_cast<size_t>(k)];
        double value;
        if (x_free) {
            value = -psi_partial(m, p, orders, s, cfg);
        } else {
            double acc = 0;
            for (double x : sample.values) {
                if (m.logq_partial_closed) {
                    acc += m.logq_partial_closed(x, p, orders);
                } else {
                    std::vector<double> v(static_cast<size_t>(m.d));
                    for (int i = 0; i < m.d; ++i) v[i] = p.theta[i];
                    fd::ScalarFn f = [&](const std::vector<double>& w) {
                        Eigen::VectorXd th(m.d);
                        for (int i = 0; i < m.d; ++i) th[i] = w[i];
                        return m.log_q(x, ParamPoint{th, p.gamma});
                    };
                    acc += fd::partial(f, v, orders);
                }
            }
            value = acc / static_cast<double>(sample.size()) - psi_partial(m, p, orders, 0, cfg);
        }
        // scatter to every permutation of the non-decreasing tuple
        std::vector<int> perm = tuple;
        do {
            t.data[flat_index(perm, m.d)] = value;
        } while (std::next_permutation(perm.begin(), perm.end()));

        // next non-decreasing tuple
        int k = r - 1;
        while (k >= 0 && tuple[static_cast<size_t>(k)] == m.d - 1) --k;
        if (k < 0) break;
        const int v0 = ++tuple[static_cast<size_t>(k)];
        for (int j = k + 1; j < r; ++j) tuple[static_cast<size_t>(j)] = v0;
    }
    return t;
}

}  // namespace

ExpansionStats expansion_stats(const ModelSpec& m, const Sample& sample, const PriorSpec& prior,
                               const QuadratureConfig& cfg) {
    ExpansionStats st;
    st.mle = fit_mle(m, sample, cfg);
    if (st.mle.degenerate) throw DomainError("expansion requires a non-degenerate MLE fit");
    const ParamPoint p{st.mle.theta_hat, st.mle.gamma_hat};

    st.a11_hat = hat_tensor(m, sample, p, 1, 1, cfg);
    st.a21_hat = hat_tensor(m, sample, p, 2, 1, cfg);
    st.a30_hat = hat_tensor(m, sample, p, 3, 0, cfg);
    st.a40_hat = hat_tensor(m, sample, p, 4, 0, cfg);
    st.a02_hat = hat_tensor(m, sample, p, 0, 2, cfg).data[0];

    auto [dtheta, dgamma] = prior.grad_log_density(m, p, cfg);
    st.dlogpi_theta = dtheta;
    st.dlogpi_gamma = dgamma;

    // D^2 pi / pi = D^2 log pi + (D log pi)(D log pi)'
    std::vector<double> v(static_cast<size_t>(m.d) + 1);
    for (int i = 0; i < m.d; ++i) v[i] = p.theta[i];
    v[static_cast<size_t>(m.d)] = p.gamma;
    fd::ScalarFn logpi = [&](const std::vector<double>& w) {
        Eigen::VectorXd th(m.d);
        for (int i = 0; i < m.d; ++i) th[i] = w[i];
        return prior.log_density(m, ParamPoint{th, w[static_cast<size_t>(m.d)]}, cfg);
    };
    st.d2pi_over_pi.assign(static_cast<size_t>(m.d) * m.d, 0.0);
    for (int i = 0; i < m.d; ++i)
        for (int j = i; j < m.d; ++j) {
            std::vector<int> orders(v.size(), 0);
            ++orders[static_cast<size_t>(i)];
            ++orders[static_cast<size_t>(j)];
            const double d2 = fd::partial(logpi, v, orders) + dtheta[i] * dtheta[j];
            st.d2pi_over_pi[static_cast<size_t>(i) * m.d + j] = d2;
            st.d2pi_over_pi[static_cast<size_t>(j) * m.d + i] = d2;
        }

    st.g_inv = st.mle.g_theta_hat.inverse();
    st.vec_ginv = vec(st.g_inv);
    return st;
}

double expansion_b1(const ExpansionStats& st, const Eigen::VectorXd& u, double t) {
    const double c = st.mle.c_hat;
    double b1 = st.dlogpi_theta.dot(u);
    b1 += dot(st.a11_hat.data, kron_pow(u, 1)) * (t / c);
    b1 += dot(st.a30_hat.data, kron_pow(u, 3)) / 6.0;
    return b1;
}

double expansion_b2(const ExpansionStats& st, const Eigen::VectorXd& u, double t) {
    const double c = st.mle.c_hat;
    const int d = st.mle.g_theta_hat.rows();
    const std::vector<double> u1 = kron_pow(u, 1);
    const std::vector<double> u2 = kron_pow(u, 2);
    const std::vector<double> u4 = kron_pow(u, 4);
    const std::vector<double>& vg = st.vec_ginv;
    const std::vector<double> vg2 = kron(vg, vg);

    std::vector<double> dlogpi(u1.size());
    for (int i = 0; i < d; ++i) dlogpi[static_cast<size_t>(i)] = st.dlogpi_theta[i];

    auto combine = [](const std::vector<double>& a, double ca, const std::vector<double>& b,
                      double cb) {
        std::vector<double> r(a.size());
        for (size_t k = 0; k < a.size(); ++k) r[k] = ca * a[k] + cb * b[k];
        return r;
    };

    double b2 = st.dlogpi_gamma * (t + 1) / c;
    b2 += 0.5 * dot(st.d2pi_over_pi, combine(u2, 1, vg, -1));
    b2 += dot(kron(dlogpi, st.a11_hat.data), combine(u2, t, vg, 1)) / c;
    b2 += dot(kron(dlogpi, st.a30_hat.data), combine(u4, 1, vg2, -3)) / 6.0;
    b2 += st.a02_hat * (t * t - 2) / (2 * c * c);
    b2 -= dot(st.a21_hat.data, combine(u2, t, vg, 1)) / (2 * c);
    b2 += dot(st.a40_hat.data, combine(u4, 1, vg2, -3)) / 24.0;
    b2 += dot(kron(st.a11_hat.data, st.a11_hat.data), combine(u2, t * t, vg, -2)) / (2 * c * c);
    {
        const std::vector<double> u6 = kron_pow(u, 6);
        const std::vector<double> vg3 = kron(vg2, vg);
        const std::vector<double> sym = symmetrize(combine(u6, 1, vg3, -15), d, 6);
        b2 += dot(kron(st.a30_hat.data, st.a30_hat.data), sym) / 72.0;
    }
    b2 += dot(kron(st.a11_hat.data, st.a30_hat.data), combine(u4, t, vg2, 3)) / (6 * c);
    return b2;
}

double expansion_density(const ExpansionStats& st, const Eigen::VectorXd& u, double t,
                         int order) {
    if (order < 0 || order > 2) throw DomainError("expansion order must be 0, 1, or 2");
    const int d = static_cast<int>(st.mle.g_theta_hat.rows());
    const double n = static_cast<double>(st.mle.n);
    const double quad = u.dot(st.mle.g_theta_hat * u);
    const double det = st.mle.g_theta_hat.determinant();
    const double lead =
        std::pow(2 * M_PI, -0.5 * d) * std::sqrt(det) * std::exp(t - 0.5 * quad);
    double bracket = 1;
    if (order >= 1) bracket += expansion_b1(st, u, t) / std::sqrt(n);
    if (order >= 2) bracket += expansion_b2(st, u, t) / n;
    return lead * bracket;
}

}  // namespace truncgeo
