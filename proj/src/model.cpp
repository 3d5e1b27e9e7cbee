#include "truncgeo/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "truncgeo/errors.hpp"
#include "truncgeo/fd.hpp"
#include "truncgeo/normal_tail.hpp"
#include "truncgeo/rng.hpp"

namespace truncgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLogPi = 1.1447298858494001741;

double factorial(int n) {
    double v = 1;
    for (int k = 2; k <= n; ++k) v *= k;
    return v;
}

double neg1pow(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

// Product p (p-1) ... (p-m+1).
double falling(double p, int m) {
    double v = 1;
    for (int k = 0; k < m; ++k) v *= (p - k);
    return v;
}

// --- set-partition Faa di Bruno for Psi(nu(point)) ---------------------------
//
// slots lists the differentiated coordinates with multiplicity (size <= 4).
// nu_partial(orders) returns the exact mixed partial of nu; outer[k] holds
// Psi^(k) at nu. The mixed partial of Psi(nu) is the sum over set partitions
// of the slots of Psi^(#blocks) times the product of block partials of nu.

using NuPartial = std::function<double(const std::vector<int>&)>;

void partitions_rec(std::size_t item, std::size_t nitems, std::vector<std::vector<int>>& blocks,
                    const std::vector<int>& slots, int ncoords, const NuPartial& nu,
                    const double* outer, double& acc) {
    if (item == nitems) {
        double prod = outer[blocks.size()];
        for (const auto& b : blocks) {
            std::vector<int> orders(ncoords, 0);
            for (int s : b) ++orders[slots[s]];
            prod *= nu(orders);
            if (prod == 0) break;
        }
        acc += prod;
        return;
    }
    // Index-based: the recursive call grows `blocks`, so references into the
    // vector would dangle across it.
    const std::size_t nblocks = blocks.size();
    for (std::size_t bi = 0; bi < nblocks; ++bi) {
        blocks[bi].push_back(static_cast<int>(item));
        partitions_rec(item + 1, nitems, blocks, slots, ncoords, nu, outer, acc);
        blocks[bi].pop_back();
    }
    blocks.push_back({static_cast<int>(item)});
    partitions_rec(item + 1, nitems, blocks, slots, ncoords, nu, outer, acc);
    blocks.pop_back();
}

double faa_di_bruno(const std::vector<int>& coord_orders, const NuPartial& nu, double nu_value) {
    std::vector<int> slots;
    for (std::size_t c = 0; c < coord_orders.size(); ++c)
        for (int k = 0; k < coord_orders[c]; ++k) slots.push_back(static_cast<int>(c));
    if (slots.size() > 4) throw DomainError("derivative order beyond 4 not supported");
    double outer[5];
    outer[0] = 0;
    outer[1] = psi_tail_d1(nu_value);
    outer[2] = psi_tail_d2(nu_value);
    outer[3] = psi_tail_d3(nu_value);
    outer[4] = psi_tail_d4(nu_value);
    double acc = 0;
    std::vector<std::vector<int>> blocks;
    partitions_rec(0, slots.size(), blocks, slots, static_cast<int>(coord_orders.size()), nu,
                   outer, acc);
    return acc;
}

// --- truncated exponential ----------------------------------------------------

ModelSpec build_trunc_exp() {
    ModelSpec m;
    m.name = "trunc_exp";
    m.d = 1;
    m.theta_domain = {{0.0, kInf}};
    m.trunc_interval = {-kInf, kInf};
    m.is_otef = true;
    m.F = {[](double x) { return -x; }};
    m.M = [](double) { return 0.0; };
    m.log_q = [](double x, const ParamPoint& p) { return -p.theta[0] * x; };
    m.psi_closed = [](const ParamPoint& p) {
        return -p.theta[0] * p.gamma - std::log(p.theta[0]);
    };
    m.psi_partial_closed = [](const ParamPoint& p, const std::vector<int>& to, int s) {
        const int a = to[0];
        const double th = p.theta[0];
        if (s == 0) {
            if (a == 1) return -p.gamma - 1.0 / th;
            return neg1pow(a) * factorial(a - 1) * std::pow(th, -a);  // a >= 2
        }
        if (s == 1) return a == 0 ? -th : (a == 1 ? -1.0 : 0.0);
        return 0.0;  // s >= 2
    };
    m.logq_partial_closed = [](double x, const ParamPoint& p, const std::vector<int>& to) {
        if (to[0] == 0) return -p.theta[0] * x;
        return to[0] == 1 ? -x : 0.0;
    };
    m.quantile = [](double u, const ParamPoint& p) {
        return p.gamma - std::log1p(-u) / p.theta[0];
    };
    m.eta_closed = [](const ParamPoint& p) {
        Eigen::VectorXd eta(1);
        eta[0] = p.gamma + 1.0 / p.theta[0];
        return eta;
    };
    m.eta_inverse_closed = [](const Eigen::VectorXd& eta, double gamma) {
        if (!(eta[0] > gamma))
            throw InversionError("trunc_exp: eta must exceed gamma");
        Eigen::VectorXd th(1);
        th[0] = 1.0 / (eta[0] - gamma);
        return th;
    };
    m.tail_scale = [](const ParamPoint& p) { return 1.0 / p.theta[0]; };
    m.theta_init = [](const Sample& s, double gamma_hat) {
        const double mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / s.size();
        Eigen::VectorXd th(1);
        th[0] = 1.0 / std::max(mean - gamma_hat, 1e-12);
        return th;
    };
    return m;
}

// --- truncated normal, natural parameters (alpha, beta) ----------------------

// nu(alpha, beta, gamma) = gamma sqrt(-2 beta) - alpha / sqrt(-2 beta).
double nu_natural(const ParamPoint& p) {
    const double s2 = std::sqrt(-2.0 * p.theta[1]);
    return p.gamma * s2 - p.theta[0] / s2;
}

double nu_natural_partial(const ParamPoint& p, const std::vector<int>& o) {
    const int aa = o[0], ab = o[1], ag = o[2];
    const double t = -2.0 * p.theta[1];
    if (aa + ag >= 2) return 0.0;
    if (aa == 1) return -std::pow(-2.0, ab) * falling(-0.5, ab) * std::pow(t, -0.5 - ab);
    if (ag == 1) return std::pow(-2.0, ab) * falling(0.5, ab) * std::pow(t, 0.5 - ab);
    // pure beta derivatives of gamma t^(1/2) - alpha t^(-1/2)
    return p.gamma * std::pow(-2.0, ab) * falling(0.5, ab) * std::pow(t, 0.5 - ab) -
           p.theta[0] * std::pow(-2.0, ab) * falling(-0.5, ab) * std::pow(t, -0.5 - ab);
}

ModelSpec build_trunc_normal_natural() {
    ModelSpec m;
    m.name = "trunc_normal_natural";
    m.d = 2;
    m.theta_domain = {{-kInf, kInf}, {-kInf, 0.0}};
    m.trunc_interval = {-kInf, kInf};
    m.is_otef = true;
    m.F = {[](double x) { return x; }, [](double x) { return x * x; }};
    m.M = [](double) { return 0.0; };
    m.log_q = [](double x, const ParamPoint& p) {
        return p.theta[0] * x + p.theta[1] * x * x;
    };
    m.psi_closed = [](const ParamPoint& p) {
        const double a = p.theta[0], b = p.theta[1];
        return -0.5 * std::log(-b) - a * a / (4 * b) + psi_tail(nu_natural(p)) + 0.5 * kLogPi;
    };
    m.psi_partial_closed = [](const ParamPoint& p, const std::vector<int>& to, int s) {
        const int aa = to[0], ab = to[1];
        const double a = p.theta[0], b = p.theta[1];
        double val = 0;
        // -1/2 log(-beta)
        if (aa == 0 && s == 0 && ab >= 1)
            val += -0.5 * neg1pow(ab - 1) * factorial(ab - 1) * std::pow(b, -ab);
        // -alpha^2 / (4 beta)
        if (s == 0 && aa <= 2 && !(aa == 0 && ab == 0)) {
            const double ca = (aa == 0) ? a * a : (aa == 1 ? 2 * a : 2.0);
            val += -0.25 * ca * neg1pow(ab) * factorial(ab) * std::pow(b, -1 - ab);
        }
        // Psi(nu)
        std::vector<int> orders = {aa, ab, s};
        val += faa_di_bruno(orders, [&](const std::vector<int>& o) {
            return nu_natural_partial(p, o);
        }, nu_natural(p));
        return val;
    };
    m.logq_partial_closed = [](double x, const ParamPoint& p, const std::vector<int>& to) {
        const int total = to[0] + to[1];
        if (total == 0) return p.theta[0] * x + p.theta[1] * x * x;
        if (total > 1) return 0.0;
        return to[0] == 1 ? x : x * x;
    };
    m.quantile = [](double u, const ParamPoint& p) {
        const double sig2 = -0.5 / p.theta[1];
        const double sig = std::sqrt(sig2);
        const double mu = p.theta[0] * sig2;
        const double nu = (p.gamma - mu) / sig;
        if (u == 0) return p.gamma;
        return mu + sig * norm_ccdf_inv(norm_ccdf(nu) * (1 - u));
    };
    m.tail_scale = [](const ParamPoint& p) { return std::sqrt(-0.5 / p.theta[1]); };
    m.theta_init = [](const Sample& s, double) {
        const double n = static_cast<double>(s.size());
        double mean = 0, sq = 0;
        for (double x : s.values) mean += x;
        mean /= n;
        for (double x : s.values) sq += (x - mean) * (x - mean);
        const double var = std::max(sq / n, 1e-8);
        Eigen::VectorXd th(2);
        th[0] = mean / var;
        th[1] = -0.5 / var;
        return th;
    };
    // eta = grad_theta psi, available in closed form through psi_partial_closed.
    auto psi_part = m.psi_partial_closed;
    m.eta_closed = [psi_part](const ParamPoint& p) {
        Eigen::VectorXd eta(2);
        eta[0] = psi_part(p, {1, 0}, 0);
        eta[1] = psi_part(p, {0, 1}, 0);
        return eta;
    };
    return m;
}

// --- truncated normal, mean / standard deviation ------------------------------

double nu_meansd(const ParamPoint& p) { return (p.gamma - p.theta[0]) / p.theta[1]; }

double nu_meansd_partial(const ParamPoint& p, const std::vector<int>& o) {
    const int am = o[0], as = o[1], ag = o[2];
    const double sig = p.theta[1];
    if (am + ag >= 2) return 0.0;
    const double sfac = neg1pow(as) * factorial(as) * std::pow(sig, -1 - as);
    if (am == 1) return -sfac;
    if (ag == 1) return sfac;
    return (p.gamma - p.theta[0]) * sfac;
}

ModelSpec build_trunc_normal_meansd() {
    ModelSpec m;
    m.name = "trunc_normal_meansd";
    m.d = 2;
    m.theta_domain = {{-kInf, kInf}, {0.0, kInf}};
    m.trunc_interval = {-kInf, kInf};
    m.is_otef = false;
    m.log_q = [](double x, const ParamPoint& p) {
        const double z = (x - p.theta[0]) / p.theta[1];
        return -0.5 * kLog2Pi - 0.5 * z * z;
    };
    m.psi_closed = [](const ParamPoint& p) {
        return std::log(p.theta[1]) + psi_tail(nu_meansd(p));
    };
    m.psi_partial_closed = [](const ParamPoint& p, const std::vector<int>& to, int s) {
        const int am = to[0], as = to[1];
        const double sig = p.theta[1];
        double val = 0;
        if (am == 0 && s == 0 && as >= 1)
            val += neg1pow(as - 1) * factorial(as - 1) * std::pow(sig, -as);  // log sigma
        std::vector<int> orders = {am, as, s};
        val += faa_di_bruno(orders, [&](const std::vector<int>& o) {
            return nu_meansd_partial(p, o);
        }, nu_meansd(p));
        return val;
    };
    m.logq_partial_closed = [](double x, const ParamPoint& p, const std::vector<int>& to) {
        const int am = to[0], as = to[1];
        const double sig = p.theta[1], z = x - p.theta[0];
        if (am == 0 && as == 0) return -0.5 * kLog2Pi - 0.5 * z * z / (sig * sig);
        if (am > 2) return 0.0;
        const double zfac = (am == 0) ? z * z : (am == 1 ? -2 * z : 2.0);
        const double sfac = neg1pow(as) * factorial(as + 1) * std::pow(sig, -2 - as);
        return -0.5 * zfac * sfac;
    };
    m.quantile = [](double u, const ParamPoint& p) {
        const double nu = nu_meansd(p);
        if (u == 0) return p.gamma;
        return p.theta[0] + p.theta[1] * norm_ccdf_inv(norm_ccdf(nu) * (1 - u));
    };
    m.tail_scale = [](const ParamPoint& p) { return p.theta[1]; };
    m.theta_init = [](const Sample& s, double) {
        const double n = static_cast<double>(s.size());
        double mean = 0, sq = 0;
        for (double x : s.values) mean += x;
        mean /= n;
        for (double x : s.values) sq += (x - mean) * (x - mean);
        Eigen::VectorXd th(2);
        th[0] = mean;
        th[1] = std::sqrt(std::max(sq / n, 1e-8));
        return th;
    };
    return m;
}

}  // namespace

// --- Sample -------------------------------------------------------------------

double Sample::min() const {
    if (values.empty()) throw DomainError("Sample::min: empty sample");
    return values.front();
}

Sample make_sample(std::vector<double> values) {
    if (values.empty()) throw DomainError("make_sample: empty sample");
    std::sort(values.begin(), values.end());
    Sample s;
    s.values = std::move(values);
    return s;
}

// --- ModelSpec ------------------------------------------------------------------

bool ModelSpec::theta_in_domain(const Eigen::VectorXd& theta) const {
    if (theta.size() != d) return false;
    for (int i = 0; i < d; ++i) {
        if (!(theta[i] > theta_domain[i].lo && theta[i] < theta_domain[i].hi)) return false;
        if (!std::isfinite(theta[i])) return false;
    }
    return true;
}

bool ModelSpec::in_domain(const ParamPoint& p) const {
    return theta_in_domain(p.theta) && std::isfinite(p.gamma) &&
           p.gamma > trunc_interval.lo && p.gamma < trunc_interval.hi;
}

void ModelSpec::check_point(const ParamPoint& p) const {
    if (p.theta.size() != d) throw DomainError(name + ": theta has wrong dimension");
    if (!in_domain(p)) throw DomainError(name + ": point outside parameter domain");
}

ModelSpec make_model(const std::string& name) {
    if (name == "trunc_exp") return build_trunc_exp();
    if (name == "trunc_normal_natural") return build_trunc_normal_natural();
    if (name == "trunc_normal_meansd") return build_trunc_normal_meansd();
    throw ConfigError("unknown model: " + name);
}

std::vector<std::string> model_names() {
    return {"trunc_exp", "trunc_normal_natural", "trunc_normal_meansd"};
}

ModelSpec make_otef(OtefConfig cfg) {
    if (cfg.d < 1 || cfg.d > 3) throw ConfigError("make_otef: d must be in 1..3");
    if (static_cast<int>(cfg.F.size()) != cfg.d)
        throw ConfigError("make_otef: need one F_i per theta coordinate");
    if (cfg.theta_domain.empty()) cfg.theta_domain.assign(static_cast<size_t>(cfg.d), Interval{});
    if (static_cast<int>(cfg.theta_domain.size()) != cfg.d)
        throw ConfigError("make_otef: need one theta domain interval per coordinate");
    ModelSpec m;
    m.name = cfg.name;
    m.d = cfg.d;
    m.theta_domain = cfg.theta_domain;
    m.trunc_interval = cfg.trunc_interval;
    m.is_otef = true;
    m.F = cfg.F;
    m.M = cfg.M ? cfg.M : [](double) { return 0.0; };
    auto F = m.F;
    auto M = m.M;
    m.log_q = [F, M](double x, const ParamPoint& p) {
        double v = M(x);
        for (std::size_t i = 0; i < F.size(); ++i) v += p.theta[static_cast<int>(i)] * F[i](x);
        return v;
    };
    m.logq_partial_closed = [F, M](double x, const ParamPoint& p, const std::vector<int>& to) {
        int total = 0, which = -1;
        for (std::size_t i = 0; i < to.size(); ++i) {
            total += to[i];
            if (to[i] > 0) which = static_cast<int>(i);
        }
        if (total == 0) {
            double v = M(x);
            for (std::size_t i = 0; i < F.size(); ++i) v += p.theta[static_cast<int>(i)] * F[i](x);
            return v;
        }
        return total == 1 ? F[which](x) : 0.0;
    };
    m.psi_closed = cfg.psi_closed;
    const double scale = cfg.tail_scale;
    m.tail_scale = [scale](const ParamPoint&) { return scale; };
    return m;
}

// --- operations -----------------------------------------------------------------

double psi_value(const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg) {
    m.check_point(p);
    if (m.psi_closed) return m.psi_closed(p);
    const double hi = m.trunc_interval.hi;
    QuadResult res;
    if (std::isfinite(hi)) {
        res = integrate([&](double u) {
            const double x = p.gamma + (hi - p.gamma) * u;
            return std::exp(m.log_q(x, p)) * (hi - p.gamma);
        }, 0.0, 1.0, cfg);
    } else {
        const double scale = m.tail_scale ? m.tail_scale(p) : 1.0;
        res = integrate([&](double u) {
            const double om = 1 - u;
            const double x = p.gamma + scale * u / om;
            const double jac = scale / (om * om);
            const double lq = m.log_q(x, p);
            return std::isfinite(lq) ? std::exp(lq) * jac : 0.0;
        }, 0.0, 1.0, cfg);
    }
    if (!(res.value > 0)) throw Error("psi_value: normalizer integral not positive");
    return std::log(res.value);
}

double psi_partial(const ModelSpec& m, const ParamPoint& p, const std::vector<int>& theta_orders,
                   int gamma_order, const QuadratureConfig& cfg) {
    m.check_point(p);
    if (static_cast<int>(theta_orders.size()) != m.d)
        throw DomainError("psi_partial: orders size mismatch");
    if (m.psi_partial_closed) {
        int total = gamma_order;
        for (int o : theta_orders) total += o;
        if (total == 0) return psi_value(m, p, cfg);
        return m.psi_partial_closed(p, theta_orders, gamma_order);
    }
    std::vector<double> pt(m.d + 1);
    for (int i = 0; i < m.d; ++i) pt[i] = p.theta[i];
    pt[m.d] = p.gamma;
    std::vector<int> orders = theta_orders;
    orders.push_back(gamma_order);
    return fd::partial([&](const std::vector<double>& q) {
        ParamPoint pp;
        pp.theta = Eigen::Map<const Eigen::VectorXd>(q.data(), m.d);
        pp.gamma = q[m.d];
        return psi_value(m, pp, cfg);
    }, pt, orders);
}

double log_density(const ModelSpec& m, double x, const ParamPoint& p, const QuadratureConfig& cfg) {
    m.check_point(p);
    if (!(x >= p.gamma) || !(x < m.trunc_interval.hi))
        throw DomainError(m.name + ": x outside the support [gamma, I2)");
    return m.log_q(x, p) - psi_value(m, p, cfg);
}

double log_density_partial(const ModelSpec& m, double x, const ParamPoint& p,
                           const std::vector<int>& theta_orders, int gamma_order,
                           const QuadratureConfig& cfg) {
    m.check_point(p);
    if (static_cast<int>(theta_orders.size()) != m.d)
        throw DomainError("log_density_partial: orders size mismatch");
    int r = 0;
    for (int o : theta_orders) {
        if (o < 0) throw DomainError("log_density_partial: negative order");
        r += o;
    }
    if (gamma_order < 0) throw DomainError("log_density_partial: negative order");
    const int total = r + gamma_order;
    if (total > 4) throw DomainError("log_density_partial: total order beyond 4 not supported");
    if (total == 0) return log_density(m, x, p, cfg);
    if (!(x > p.gamma) || !(x < m.trunc_interval.hi))
        throw DomainError(m.name + ": derivatives need x strictly inside the support");

    // gamma enters log p only through -psi.
    if (gamma_order >= 1) return -psi_partial(m, p, theta_orders, gamma_order, cfg);

    double lq;
    if (m.logq_partial_closed) {
        lq = m.logq_partial_closed(x, p, theta_orders);
    } else {
        std::vector<double> pt(m.d);
        for (int i = 0; i < m.d; ++i) pt[i] = p.theta[i];
        lq = fd::partial([&](const std::vector<double>& q) {
            ParamPoint pp;
            pp.theta = Eigen::Map<const Eigen::VectorXd>(q.data(), m.d);
            pp.gamma = p.gamma;
            return m.log_q(x, pp);
        }, pt, theta_orders);
    }
    return lq - psi_partial(m, p, theta_orders, 0, cfg);
}

double log_density_partial_tuple(const ModelSpec& m, double x, const ParamPoint& p,
                                 const std::vector<int>& theta_components, int gamma_order,
                                 const QuadratureConfig& cfg) {
    std::vector<int> orders(m.d, 0);
    for (int c : theta_components) {
        if (c < 0 || c >= m.d) throw DomainError("log_density_partial: component out of range");
        ++orders[c];
    }
    return log_density_partial(m, x, p, orders, gamma_order, cfg);
}

Sample draw_sample(const ModelSpec& m, const ParamPoint& p, std::size_t n, std::uint64_t seed) {
    m.check_point(p);
    if (n == 0) throw DomainError("draw_sample: n must be positive");
    Rng rng(seed);
    std::vector<double> xs(n);
    if (m.quantile) {
        for (auto& x : xs) x = m.quantile(rng.uniform01(), p);
    } else {
        // Numeric inversion of the CDF through the tail substitution.
        const double psi = psi_value(m, p);
        const double scale = m.tail_scale ? m.tail_scale(p) : 1.0;
        const double hi = m.trunc_interval.hi;
        auto x_of_u = [&](double u) {
            return std::isfinite(hi) ? p.gamma + (hi - p.gamma) * u
                                     : p.gamma + scale * u / (1 - u);
        };
        auto dens_u = [&](double u) {
            const double om = 1 - u;
            const double jac = std::isfinite(hi) ? (hi - p.gamma) : scale / (om * om);
            const double lq = m.log_q(x_of_u(u), p);
            return std::isfinite(lq) ? std::exp(lq - psi) * jac : 0.0;
        };
        const int npanel = 512;
        std::vector<double> cum(npanel + 1, 0.0);
        for (int i = 0; i < npanel; ++i) {
            const double a = static_cast<double>(i) / npanel, b = (i + 1.0) / npanel;
            cum[i + 1] = cum[i] + integrate(dens_u, a, b, {1e-10, 1e-13, 50}).value;
        }
        for (auto& x : xs) {
            const double target = rng.uniform01() * cum[npanel];
            const auto it = std::upper_bound(cum.begin(), cum.end(), target);
            const int i = std::clamp(static_cast<int>(it - cum.begin()) - 1, 0, npanel - 1);
            const double pstart = static_cast<double>(i) / npanel;
            const double base = cum[i];
            double lo = pstart, hi_u = pstart + 1.0 / npanel;
            for (int k = 0; k < 40; ++k) {
                const double mid = 0.5 * (lo + hi_u);
                const double mass = base + integrate(dens_u, pstart, mid, {1e-10, 1e-13, 50}).value;
                (mass < target ? lo : hi_u) = mid;
            }
            x = x_of_u(0.5 * (lo + hi_u));
        }
    }
    return make_sample(std::move(xs));
}

std::function<double(const ParamPoint&)> make_loglik(const ModelSpec& m, const Sample& sample) {
    const double n = static_cast<double>(sample.size());
    const double xmin = sample.min();
    if (m.is_otef) {
        Eigen::VectorXd sf(m.d);
        for (int i = 0; i < m.d; ++i) {
            double acc = 0;
            for (double x : sample.values) acc += m.F[i](x);
            sf[i] = acc;
        }
        double sm = 0;
        for (double x : sample.values) sm += m.M(x);
        ModelSpec mcopy = m;
        return [mcopy, sf, sm, n, xmin](const ParamPoint& p) {
            if (!mcopy.in_domain(p) || p.gamma > xmin) return -kInf;
            const double psival = mcopy.psi_closed ? mcopy.psi_closed(p) : psi_value(mcopy, p);
            return sf.dot(p.theta) + sm - n * psival;
        };
    }
    ModelSpec mcopy = m;
    std::vector<double> xs = sample.values;
    return [mcopy, xs, n, xmin](const ParamPoint& p) {
        if (!mcopy.in_domain(p) || p.gamma > xmin) return -kInf;
        double acc = 0;
        for (double x : xs) acc += mcopy.log_q(x, p);
        const double psival = mcopy.psi_closed ? mcopy.psi_closed(p) : psi_value(mcopy, p);
        return acc - n * psival;
    };
}

}  // namespace truncgeo
