#include "truncgeo/geometry.hpp"

#include <cmath>
#include <sstream>

#include "truncgeo/errors.hpp"
#include "truncgeo/fd.hpp"

namespace truncgeo {

namespace {

ParamPoint point_from_coords(const std::vector<double>& q, int d) {
    ParamPoint p;
    p.theta = Eigen::Map<const Eigen::VectorXd>(q.data(), d);
    p.gamma = q[d];
    return p;
}

std::vector<double> coords_of(const ParamPoint& p, int d) {
    std::vector<double> q(d + 1);
    for (int i = 0; i < d; ++i) q[i] = p.theta[i];
    q[d] = p.gamma;
    return q;
}

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& g, const std::string& what) {
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw GeometryError(what + ": metric block not positive definite");
    return llt.solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
}

}  // namespace

double GeometryAt::christoffel(int a, int b, int cidx) const {
    const int n = static_cast<int>(point.theta.size()) + 1;
    return christoffel_g[static_cast<std::size_t>((a * n + b) * n + cidx)];
}

Eigen::MatrixXd metric_full(const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg,
                            ATensorMode mode) {
    const int d = m.d;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d + 1, d + 1);
    const ATensor a20 = a_tensor(m, p, 2, 0, cfg, mode);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = -a20.data[static_cast<std::size_t>(i * d + j)];
    const double c = a_tensor(m, p, 0, 1, cfg, mode).data[0];
    g(d, d) = c * c;
    return g;
}

GeometryAt geometry_at(const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg,
                       ATensorMode mode) {
    m.check_point(p);
    const int d = m.d;
    GeometryAt out;
    out.point = p;

    const ATensor a20 = a_tensor(m, p, 2, 0, cfg, mode);
    out.g_theta = Eigen::MatrixXd(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out.g_theta(i, j) = -a20.data[static_cast<std::size_t>(i * d + j)];
    out.g_theta_inv = invert_spd(out.g_theta, m.name);

    out.c = a_tensor(m, p, 0, 1, cfg, mode).data[0];
    if (!(out.c > 0)) throw GeometryError(m.name + ": c = -d_gamma psi must be positive");
    out.g_gammagamma = out.c * out.c;

    const ATensor a11t = a_tensor(m, p, 1, 1, cfg, mode);
    out.a11 = Eigen::Map<const Eigen::VectorXd>(a11t.data.data(), d);
    out.a21 = a_tensor(m, p, 2, 1, cfg, mode);
    out.a30 = a_tensor(m, p, 3, 0, cfg, mode);
    out.a02 = a_tensor(m, p, 0, 2, cfg, mode).data[0];

    // Levi-Civita from first differences of the metric map. The metric is
    // evaluated through the closed/x-free route regardless of `mode`:
    // differencing quadrature output would trade tolerance noise for
    // derivative error.
    const int n = d + 1;
    const std::vector<double> base = coords_of(p, d);
    std::vector<Eigen::MatrixXd> dg(n);
    for (int e = 0; e < n; ++e) {
        const double h = fd::step(1, base[e]);
        std::vector<double> qp = base, qm = base;
        qp[e] += h;
        qm[e] -= h;
        const Eigen::MatrixXd gp = metric_full(m, point_from_coords(qp, d), cfg);
        const Eigen::MatrixXd gm = metric_full(m, point_from_coords(qm, d), cfg);
        dg[e] = (gp - gm) / (2 * h);
    }
    out.christoffel_g.assign(static_cast<std::size_t>(n) * n * n, 0.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int cc = 0; cc < n; ++cc)
                out.christoffel_g[static_cast<std::size_t>((a * n + b) * n + cc)] =
                    0.5 * (dg[a](b, cc) + dg[b](cc, a) - dg[cc](a, b));

    // Regular-block alpha connection: alpha E[(d_i d_j l)(d_k l)] + (1-alpha) Gamma^g.
    ATensor e2(d, 3, 0);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                std::vector<int> oij(d, 0), ok(d, 0);
                ++oij[i];
                ++oij[j];
                ++ok[k];
                const double v = expect_partial_product(m, p, {{oij, 0}, {ok, 0}}, cfg);
                e2.data[static_cast<std::size_t>((i * d + j) * d + k)] = v;
                e2.data[static_cast<std::size_t>((j * d + i) * d + k)] = v;
            }
    std::vector<double> reg(static_cast<std::size_t>(d) * d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                reg[static_cast<std::size_t>((i * d + j) * d + k)] =
                    out.christoffel_g[static_cast<std::size_t>((i * n + j) * n + k)];
    out.alpha_christoffel = [e2, reg, d](double alpha) {
        ATensor g(d, 3, 0);
        for (std::size_t idx = 0; idx < g.data.size(); ++idx)
            g.data[idx] = alpha * e2.data[idx] + (1 - alpha) * reg[idx];
        return g;
    };
    return out;
}

TangentVector chi_vector(const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg) {
    m.check_point(p);
    const int d = m.d;
    const ATensor a20 = a_tensor(m, p, 2, 0, cfg);
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = -a20.data[static_cast<std::size_t>(i * d + j)];
    const ATensor a11t = a_tensor(m, p, 1, 1, cfg);
    const Eigen::VectorXd a11 = Eigen::Map<const Eigen::VectorXd>(a11t.data.data(), d);
    TangentVector v;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw GeometryError(m.name + ": metric not positive definite");
    v.d_theta = llt.solve(a11);
    v.d_gamma = 1;
    return v;
}

double extended_volume(const ModelSpec& m, const ParamPoint& p, double rho, double tau,
                       const QuadratureConfig& cfg) {
    m.check_point(p);
    const ATensor a20 = a_tensor(m, p, 2, 0, cfg);
    Eigen::MatrixXd g(m.d, m.d);
    for (int i = 0; i < m.d; ++i)
        for (int j = 0; j < m.d; ++j)
            g(i, j) = -a20.data[static_cast<std::size_t>(i * m.d + j)];
    const double det = g.determinant();
    if (!(det > 0)) throw GeometryError(m.name + ": det g_theta must be positive");
    const double c = c_value(m, p, cfg);
    if (!(c > 0)) throw GeometryError(m.name + ": c must be positive");
    return std::pow(det, rho + 0.5) * std::pow(c * c, tau + 0.5);
}

Eigen::VectorXd eta_forward(const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg) {
    m.check_point(p);
    if (m.eta_closed) return m.eta_closed(p);
    if (!m.is_otef)
        throw ConfigError(m.name + ": expectation parameters need an exponential-family model");
    Eigen::VectorXd eta(m.d);
    for (int i = 0; i < m.d; ++i) eta[i] = expect(m, p, m.F[static_cast<std::size_t>(i)], cfg);
    return eta;
}

namespace {

double domain_center(const Interval& iv) {
    const bool lf = std::isfinite(iv.lo), hf = std::isfinite(iv.hi);
    if (lf && hf) return 0.5 * (iv.lo + iv.hi);
    if (lf) return iv.lo + 1;
    if (hf) return iv.hi - 1;
    return 0;
}

}  // namespace

Eigen::VectorXd eta_inverse(const ModelSpec& m, const Eigen::VectorXd& eta, double gamma,
                            const Eigen::VectorXd* theta_start, const QuadratureConfig& cfg) {
    if (m.eta_inverse_closed) {
        const Eigen::VectorXd th = m.eta_inverse_closed(eta, gamma);
        ParamPoint p;
        p.theta = th;
        p.gamma = gamma;
        if (!m.in_domain(p)) throw InversionError(m.name + ": eta outside the image of the map");
        return th;
    }
    if (!m.eta_closed && !m.is_otef)
        throw ConfigError(m.name + ": expectation parameters need an exponential-family model");

    ParamPoint p;
    p.gamma = gamma;
    if (theta_start) {
        p.theta = *theta_start;
    } else {
        p.theta = Eigen::VectorXd(m.d);
        for (int i = 0; i < m.d; ++i) p.theta[i] = domain_center(m.theta_domain[i]);
    }
    if (!m.in_domain(p)) throw InversionError(m.name + ": starting point outside the domain");

    // Damped Newton on eta(theta) = eta*. For the intrinsic map (gradient of
    // the normalizer) the Jacobian is its Hessian; a model-supplied closed
    // map may differ from that by more than the examples' sign flip, so the
    // Jacobian is then differenced from the map actually being inverted.
    double res_norm = (eta_forward(m, p, cfg) - eta).norm();
    for (int iter = 0; iter < 100; ++iter) {
        if (res_norm <= 1e-10 * (1 + eta.norm())) return p.theta;
        Eigen::MatrixXd jac(m.d, m.d);
        if (m.eta_closed) {
            for (int j = 0; j < m.d; ++j) {
                const double h = fd::step(1, p.theta[j]);
                ParamPoint up = p, dn = p;
                up.theta[j] += h;
                dn.theta[j] -= h;
                if (!m.theta_in_domain(up.theta) || !m.theta_in_domain(dn.theta))
                    throw InversionError(m.name + ": cannot difference eta at the domain edge");
                jac.col(j) = (m.eta_closed(up) - m.eta_closed(dn)) / (2 * h);
            }
        } else {
            const ATensor a20 = a_tensor(m, p, 2, 0, cfg);
            for (int i = 0; i < m.d; ++i)
                for (int j = 0; j < m.d; ++j)
                    jac(i, j) = -a20.data[static_cast<std::size_t>(i * m.d + j)];
        }
        const Eigen::VectorXd fcur = eta_forward(m, p, cfg) - eta;
        Eigen::VectorXd delta = jac.fullPivLu().solve(-fcur);
        double lam = 1;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            ParamPoint trial = p;
            trial.theta = p.theta + lam * delta;
            if (m.theta_in_domain(trial.theta)) {
                const double rn = (eta_forward(m, trial, cfg) - eta).norm();
                if (rn < res_norm) {
                    p = trial;
                    res_norm = rn;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if (!accepted) throw InversionError(m.name + ": eta inversion stalled");
    }
    throw InversionError(m.name + ": eta inversion did not converge in 100 iterations");
}

Streamline trace_streamline(const ModelSpec& m, const ParamPoint& start, double s_max, double step,
                            const QuadratureConfig& cfg) {
    m.check_point(start);
    if (!(step > 0)) throw DomainError("trace_streamline: step must be positive");
    if (s_max < 0) throw DomainError("trace_streamline: s_max must be nonnegative");

    auto chi_coords = [&](const ParamPoint& p, Eigen::VectorXd& out) {
        const TangentVector v = chi_vector(m, p, cfg);
        out.resize(m.d + 1);
        out.head(m.d) = v.d_theta;
        out[m.d] = v.d_gamma;
    };
    auto shift = [&](const ParamPoint& p, const Eigen::VectorXd& k, double a) {
        ParamPoint q;
        q.theta = p.theta + a * k.head(m.d);
        q.gamma = p.gamma + a * k[m.d];
        return q;
    };

    Streamline line;
    ParamPoint p = start;
    double s = 0;
    line.nodes.push_back({s, p, eta_forward(m, p, cfg)});
    while (s < s_max) {
        const double h = std::min(step, s_max - s);
        Eigen::VectorXd k1, k2, k3, k4;
        try {
            chi_coords(p, k1);
            ParamPoint p2 = shift(p, k1, 0.5 * h);
            if (!m.in_domain(p2)) throw GeometryError("stage left the domain");
            chi_coords(p2, k2);
            ParamPoint p3 = shift(p, k2, 0.5 * h);
            if (!m.in_domain(p3)) throw GeometryError("stage left the domain");
            chi_coords(p3, k3);
            ParamPoint p4 = shift(p, k3, h);
            if (!m.in_domain(p4)) throw GeometryError("stage left the domain");
            chi_coords(p4, k4);
        } catch (const GeometryError&) {
            line.status = StreamStatus::ExitedDomain;
            return line;
        }
        const Eigen::VectorXd k = (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
        const ParamPoint next = shift(p, k, h);
        if (!m.in_domain(next)) {
            line.status = StreamStatus::ExitedDomain;
            return line;
        }
        p = next;
        s += h;
        line.nodes.push_back({s, p, eta_forward(m, p, cfg)});
    }
    return line;
}

std::string streamline_csv(const Streamline& line, int d) {
    std::ostringstream os;
    os << "s";
    for (int i = 1; i <= d; ++i) os << ",theta_" << i;
    os << ",gamma";
    for (int i = 1; i <= d; ++i) os << ",eta_" << i;
    os << ",status\n";
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (std::size_t k = 0; k < line.nodes.size(); ++k) {
        const auto& nd = line.nodes[k];
        put(nd.s);
        for (int i = 0; i < d; ++i) {
            os << ",";
            put(nd.point.theta[i]);
        }
        os << ",";
        put(nd.point.gamma);
        for (int i = 0; i < d; ++i) {
            os << ",";
            put(nd.eta[i]);
        }
        const bool last = (k + 1 == line.nodes.size());
        os << "," << (last && line.status == StreamStatus::ExitedDomain ? "exited" : "ok") << "\n";
    }
    return os.str();
}

}  // namespace truncgeo
