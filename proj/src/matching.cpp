#include "truncgeo/matching.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "truncgeo/errors.hpp"
#include "truncgeo/expectations.hpp"
#include "truncgeo/fd.hpp"
#include "truncgeo/geometry.hpp"

namespace truncgeo {

namespace {

std::vector<double> pack(const ParamPoint& p) {
    std::vector<double> v(static_cast<size_t>(p.theta.size()) + 1);
    for (int i = 0; i < p.theta.size(); ++i) v[i] = p.theta[i];
    v.back() = p.gamma;
    return v;
}

ParamPoint unpack(int d, const std::vector<double>& v) {
    Eigen::VectorXd th(d);
    for (int i = 0; i < d; ++i) th[i] = v[i];
    return ParamPoint{th, v[d]};
}

// First partial of `f` in packed coordinate k.
double d1(const fd::ScalarFn& f, const std::vector<double>& v, int k) {
    std::vector<int> orders(v.size(), 0);
    orders[k] = 1;
    return fd::partial(f, v, orders);
}

Eigen::MatrixXd metric_regular(const ModelSpec& m, const ParamPoint& p,
                               const QuadratureConfig& cfg) {
    const ATensor a20 = a_tensor(m, p, 2, 0, cfg);
    Eigen::MatrixXd g(m.d, m.d);
    for (int i = 0; i < m.d; ++i)
        for (int j = 0; j < m.d; ++j) g(i, j) = -a20.data[static_cast<size_t>(i) * m.d + j];
    return g;
}

Eigen::MatrixXd inverse_checked(const Eigen::MatrixXd& g) {
    if (!(g.determinant() > 0)) throw GeometryError("metric regular block is not positive definite");
    return g.inverse();
}

// Contraction (Gamma_{mk,j} - Gamma_{kj,m}) g^{km} for each regular j,
// computed both as printed in the gamma-condition equation and in the
// summation pattern of its derivation; the two must agree.
Eigen::VectorXd christoffel_contraction(const GeometryAt& geo, const Eigen::MatrixXd& ginv, int d) {
    Eigen::VectorXd printed = Eigen::VectorXd::Zero(d), derived = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < d; ++j) {
        for (int mIdx = 0; mIdx < d; ++mIdx)
            for (int k = 0; k < d; ++k)
                printed[j] += (geo.christoffel(mIdx, k, j) - geo.christoffel(k, j, mIdx)) * ginv(k, mIdx);
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k)
                derived[j] += ginv(i, k) * (geo.christoffel(i, k, j) - geo.christoffel(k, j, i));
    }
    if ((printed - derived).cwiseAbs().maxCoeff() > 1e-8 * (1 + printed.cwiseAbs().maxCoeff()))
        throw GeometryError("Christoffel contraction readings disagree at this point");
    return printed;
}

double pm_gamma_residual(const ModelSpec& m, const ParamPoint& p, const PriorSpec& prior,
                         const QuadratureConfig& cfg) {
    const int d = m.d;
    const GeometryAt geo = geometry_at(m, p, cfg);
    const Eigen::MatrixXd& ginv = geo.g_theta_inv;
    const auto [dpi_theta, dpi_gamma] = prior.grad_log_density(m, p, cfg);

    const std::vector<double> v = pack(p);
    fd::ScalarFn log_c = [&](const std::vector<double>& w) {
        return std::log(c_value(m, unpack(d, w), cfg));
    };
    fd::ScalarFn log_det = [&](const std::vector<double>& w) {
        return std::log(metric_regular(m, unpack(d, w), cfg).determinant());
    };

    const double dgamma_log_c = d1(log_c, v, d);
    Eigen::MatrixXd dA(d, d);  // dA(i, j) = d_i A^(1,1)_j
    for (int j = 0; j < d; ++j) {
        fd::ScalarFn a11_j = [&, j](const std::vector<double>& w) {
            return a_tensor(m, unpack(d, w), 1, 1, cfg).data[static_cast<size_t>(j)];
        };
        for (int i = 0; i < d; ++i) dA(i, j) = d1(a11_j, v, i);
    }
    const Eigen::VectorXd contraction = christoffel_contraction(geo, ginv, d);

    double lhs = dpi_gamma, rhs = dgamma_log_c;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            lhs += geo.a11[i] * ginv(i, j) * dpi_theta[j];
            rhs -= dA(i, j) * ginv(i, j);
        }
    for (int j = 0; j < d; ++j) {
        const double brace = d1(log_c, v, j) + d1(log_det, v, j) - contraction[j];
        for (int i = 0; i < d; ++i) rhs += geo.a11[i] * ginv(i, j) * brace;
    }
    return lhs - rhs;
}

double pm_theta_residual(const ModelSpec& m, const ParamPoint& p, const PriorSpec& prior,
                         int i, const QuadratureConfig& cfg) {
    const int d = m.d;
    const Eigen::MatrixXd ginv = inverse_checked(metric_regular(m, p, cfg));
    if (!(ginv(i, i) > 0)) throw GeometryError("g^{ii} must be positive");
    const auto [dpi_theta, dpi_gamma] = prior.grad_log_density(m, p, cfg);
    (void)dpi_gamma;  // the theta condition involves regular derivatives only

    const std::vector<double> v = pack(p);
    double residual = 0;
    for (int j = 0; j < d; ++j) {
        fd::ScalarFn ratio_j = [&, j](const std::vector<double>& w) {
            const Eigen::MatrixXd gi = inverse_checked(metric_regular(m, unpack(d, w), cfg));
            return gi(i, j) / std::sqrt(gi(i, i));
        };
        residual += ginv(i, j) / std::sqrt(ginv(i, i)) * dpi_theta[j] + d1(ratio_j, v, j);
    }
    return residual;
}

double mm_gamma_residual(const ModelSpec& m, const ParamPoint& p, const PriorSpec& prior,
                         const QuadratureConfig& cfg) {
    const int d = m.d;
    const Eigen::MatrixXd ginv = inverse_checked(metric_regular(m, p, cfg));
    const ATensor a11 = a_tensor(m, p, 1, 1, cfg);
    const ATensor a21 = a_tensor(m, p, 2, 1, cfg);
    const ATensor a30 = a_tensor(m, p, 3, 0, cfg);
    const auto [dpi_theta, dpi_gamma] = prior.grad_log_density(m, p, cfg);

    const std::vector<double> v = pack(p);
    fd::ScalarFn log_c = [&](const std::vector<double>& w) {
        return std::log(c_value(m, unpack(d, w), cfg));
    };

    double residual = dpi_gamma - 2 * d1(log_c, v, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            residual += 0.5 * a21.data[static_cast<size_t>(i) * d + j] * ginv(i, j);
    for (int j = 0; j < d; ++j) {
        double brace = dpi_theta[j] - 2 * d1(log_c, v, j);
        for (int k = 0; k < d; ++k)
            for (int mm = 0; mm < d; ++mm)
                brace += 0.5 * a30.data[(static_cast<size_t>(j) * d + k) * d + mm] * ginv(k, mm);
        for (int i = 0; i < d; ++i) residual += a11.data[static_cast<size_t>(i)] * ginv(i, j) * brace;
    }
    return residual;
}

double mm_theta_residual(const ModelSpec& m, const ParamPoint& p, const PriorSpec& prior,
                         int i, const QuadratureConfig& cfg) {
    const int d = m.d;
    const GeometryAt geo = geometry_at(m, p, cfg);
    const ATensor gamma_e = geo.alpha_christoffel(1.0);
    const auto [dpi_theta, dpi_gamma] = prior.grad_log_density(m, p, cfg);
    (void)dpi_gamma;

    const std::vector<double> v = pack(p);
    fd::ScalarFn log_pi_j = [&](const std::vector<double>& w) {
        const ParamPoint q = unpack(d, w);
        // pi_J = sqrt(det g) = sqrt(det g_theta * c^2)
        return 0.5 * std::log(metric_regular(m, q, cfg).determinant()) +
               std::log(c_value(m, q, cfg));
    };
    double residual = dpi_theta[i] - d1(log_pi_j, v, i);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            residual -= 0.5 * gamma_e.data[(static_cast<size_t>(j) * d + k) * d + i] *
                        geo.g_theta_inv(j, k);
    return residual;
}

}  // namespace

MatchKind match_kind_from_name(const std::string& name) {
    if (name == "pm_gamma") return MatchKind::PmGamma;
    if (name == "pm_theta") return MatchKind::PmTheta;
    if (name == "mm_gamma") return MatchKind::MmGamma;
    if (name == "mm_theta") return MatchKind::MmTheta;
    throw ConfigError("unknown matching condition \"" + name +
                      "\" (want pm_gamma, pm_theta, mm_gamma, or mm_theta)");
}

std::string match_kind_name(MatchKind kind) {
    switch (kind) {
        case MatchKind::PmGamma: return "pm_gamma";
        case MatchKind::PmTheta: return "pm_theta";
        case MatchKind::MmGamma: return "mm_gamma";
        case MatchKind::MmTheta: return "mm_theta";
    }
    throw Error("unreachable match kind");
}

double matching_residual(const ModelSpec& m, const ParamPoint& p, const PriorSpec& prior,
                         MatchKind kind, int component, const QuadratureConfig& cfg) {
    m.check_point(p);
    if ((kind == MatchKind::PmTheta || kind == MatchKind::MmTheta) &&
        (component < 0 || component >= m.d))
        throw DomainError("theta-condition component out of range");
    switch (kind) {
        case MatchKind::PmGamma: return pm_gamma_residual(m, p, prior, cfg);
        case MatchKind::PmTheta: return pm_theta_residual(m, p, prior, component, cfg);
        case MatchKind::MmGamma: return mm_gamma_residual(m, p, prior, cfg);
        case MatchKind::MmTheta: return mm_theta_residual(m, p, prior, component, cfg);
    }
    throw Error("unreachable match kind");
}

double lie_residual(const ModelSpec& m, const ParamPoint& p, const PriorSpec& prior,
                    MatchKind kind, const QuadratureConfig& cfg) {
    if (!m.is_otef)
        throw ConfigError("Lie-derivative residuals are defined only on exponential-type families");
    m.check_point(p);
    double w_det, w_gg;
    if (kind == MatchKind::PmGamma) {
        w_det = 1.0;
        w_gg = 0.5;
    } else if (kind == MatchKind::MmGamma) {
        w_det = 0.5;
        w_gg = 1.0;
    } else {
        throw ConfigError("Lie residuals exist for the gamma conditions only");
    }

    const int d = m.d;
    const TangentVector chi = chi_vector(m, p, cfg);
    const auto [dpi_theta, dpi_gamma] = prior.grad_log_density(m, p, cfg);

    const std::vector<double> v = pack(p);
    fd::ScalarFn log_det = [&](const std::vector<double>& w) {
        return std::log(metric_regular(m, unpack(d, w), cfg).determinant());
    };
    fd::ScalarFn log_gg = [&](const std::vector<double>& w) {
        const double c = c_value(m, unpack(d, w), cfg);
        return std::log(c * c);
    };

    // L_chi f for scalar f is just the directional derivative along chi.
    double res = dpi_gamma - w_det * d1(log_det, v, d) - w_gg * d1(log_gg, v, d);
    for (int j = 0; j < d; ++j)
        res += chi.d_theta[j] *
               (dpi_theta[j] - w_det * d1(log_det, v, j) - w_gg * d1(log_gg, v, j));
    return res;
}

}  // namespace truncgeo
