#include "truncgeo/prior.hpp"

#include <cmath>
#include <sstream>

#include "truncgeo/errors.hpp"
#include "truncgeo/expectations.hpp"
#include "truncgeo/expr.hpp"
#include "truncgeo/fd.hpp"

namespace truncgeo {

namespace {

// log e_{rho,tau} = (rho + 1/2) log det g_theta + (tau + 1/2) log c^2.
double log_extended_volume(const ModelSpec& m, const ParamPoint& p, double rho, double tau,
                           const QuadratureConfig& cfg) {
    const ATensor a20 = a_tensor(m, p, 2, 0, cfg);
    Eigen::MatrixXd g(m.d, m.d);
    for (int i = 0; i < m.d; ++i)
        for (int j = 0; j < m.d; ++j) g(i, j) = -a20.data[static_cast<size_t>(i) * m.d + j];
    const double det = g.determinant();
    if (!(det > 0)) throw GeometryError("metric regular block is not positive definite");
    const double c = c_value(m, p, cfg);
    return (rho + 0.5) * std::log(det) + (tau + 0.5) * std::log(c * c);
}

std::string format_param(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

double PriorSpec::log_density(const ModelSpec& m, const ParamPoint& p,
                              const QuadratureConfig& cfg) const {
    if (!log_pi) throw ConfigError("prior has no log-density");
    return log_pi(m, p, cfg);
}

std::pair<Eigen::VectorXd, double> PriorSpec::grad_log_density(const ModelSpec& m,
                                                               const ParamPoint& p,
                                                               const QuadratureConfig& cfg) const {
    if (grad_log_pi_closed) return grad_log_pi_closed(m, p, cfg);
    std::vector<double> v(static_cast<size_t>(m.d) + 1);
    for (int i = 0; i < m.d; ++i) v[i] = p.theta[i];
    v[m.d] = p.gamma;
    fd::ScalarFn f = [&](const std::vector<double>& w) {
        Eigen::VectorXd th(m.d);
        for (int i = 0; i < m.d; ++i) th[i] = w[i];
        return log_density(m, ParamPoint{th, w[m.d]}, cfg);
    };
    Eigen::VectorXd dtheta(m.d);
    std::vector<int> orders(v.size(), 0);
    for (int i = 0; i < m.d; ++i) {
        orders[i] = 1;
        dtheta[i] = fd::partial(f, v, orders);
        orders[i] = 0;
    }
    orders[m.d] = 1;
    const double dgamma = fd::partial(f, v, orders);
    return {dtheta, dgamma};
}

PriorSpec flat_prior() {
    PriorSpec s;
    s.tag = PriorTag::Custom;
    s.name = "flat";
    s.log_pi = [](const ModelSpec&, const ParamPoint&, const QuadratureConfig&) { return 0.0; };
    s.grad_log_pi_closed = [](const ModelSpec& m, const ParamPoint&, const QuadratureConfig&) {
        return std::make_pair(Eigen::VectorXd::Zero(m.d).eval(), 0.0);
    };
    return s;
}

PriorSpec jeffreys_prior() {
    PriorSpec s;
    s.tag = PriorTag::Jeffreys;
    s.name = "jeffreys";
    s.log_pi = [](const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg) {
        return log_extended_volume(m, p, 0, 0, cfg);
    };
    return s;
}

PriorSpec alpha_parallel_prior(double alpha) {
    PriorSpec s;
    s.tag = PriorTag::AlphaParallel;
    s.name = "alpha_parallel:" + format_param(alpha);
    s.alpha = alpha;
    s.rho = 0;
    s.tau = alpha / 2;
    s.log_pi = [alpha](const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg) {
        if (!m.is_otef)
            throw ConfigError("alpha-parallel priors are defined only on exponential-type families");
        return log_extended_volume(m, p, 0, alpha / 2, cfg);
    };
    return s;
}

PriorSpec extended_volume_prior(double rho, double tau) {
    PriorSpec s;
    s.tag = PriorTag::ExtendedVolume;
    s.name = "extended_volume:" + format_param(rho) + "," + format_param(tau);
    s.rho = rho;
    s.tau = tau;
    s.log_pi = [rho, tau](const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg) {
        return log_extended_volume(m, p, rho, tau, cfg);
    };
    return s;
}

PriorSpec expression_prior(const std::string& pi_expression) {
    CompiledExpr expr = parse_expr(pi_expression);
    if (expr.uses_x()) throw ConfigError("prior expressions may not reference x");
    PriorSpec s;
    s.tag = PriorTag::Custom;
    s.name = pi_expression;
    s.log_pi = [expr](const ModelSpec&, const ParamPoint& p, const QuadratureConfig&) {
        const double v = expr.eval(p);
        if (!std::isfinite(v) || v <= 0)
            throw DomainError("prior expression \"" + expr.source() +
                              "\" is not positive at the requested point");
        return std::log(v);
    };
    return s;
}

PriorSpec custom_prior(std::string name,
                       std::function<double(const ModelSpec&, const ParamPoint&,
                                            const QuadratureConfig&)> log_pi) {
    PriorSpec s;
    s.tag = PriorTag::Custom;
    s.name = std::move(name);
    s.log_pi = std::move(log_pi);
    return s;
}

PriorSpec make_prior(const std::string& text) {
    if (text.empty()) throw ConfigError("empty prior specification");
    if (text == "flat") return flat_prior();
    if (text == "jeffreys") return jeffreys_prior();
    const auto parse_tail = [&](size_t prefix_len, size_t want) {
        std::vector<double> vals;
        std::stringstream ss(text.substr(prefix_len));
        std::string part;
        while (std::getline(ss, part, ',')) {
            try {
                size_t used = 0;
                vals.push_back(std::stod(part, &used));
                if (used != part.size()) throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw ConfigError("malformed parameter in prior \"" + text + "\"");
            }
        }
        if (vals.size() != want)
            throw ConfigError("prior \"" + text + "\" needs " + std::to_string(want) +
                              " parameter(s)");
        return vals;
    };
    if (text.rfind("alpha_parallel:", 0) == 0)
        return alpha_parallel_prior(parse_tail(15, 1)[0]);
    if (text.rfind("extended_volume:", 0) == 0) {
        auto v = parse_tail(16, 2);
        return extended_volume_prior(v[0], v[1]);
    }
    return expression_prior(text);
}

}  // namespace truncgeo
