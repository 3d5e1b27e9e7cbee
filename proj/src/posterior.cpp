#include "truncgeo/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "truncgeo/errors.hpp"

namespace truncgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GridAxis build_axis(double lo, double hi, int panels, int ppp) {
    if (!(lo < hi)) throw DomainError("grid axis has empty range");
    GridAxis ax;
    ax.edges.resize(static_cast<size_t>(panels) + 1);
    for (int k = 0; k <= panels; ++k)
        ax.edges[k] = lo + (hi - lo) * static_cast<double>(k) / panels;
    ax.edges.back() = hi;
    const GaussRule& rule = gauss_legendre(ppp);
    ax.nodes.reserve(static_cast<size_t>(panels) * ppp);
    ax.weights.reserve(ax.nodes.capacity());
    for (int k = 0; k < panels; ++k) {
        const double a = ax.edges[k], b = ax.edges[k + 1], h = 0.5 * (b - a);
        for (int q = 0; q < ppp; ++q) {
            ax.nodes.push_back(a + h * (rule.nodes[q] + 1));
            ax.weights.push_back(h * rule.weights[q]);
        }
    }
    return ax;
}

// Visit every node tuple; fn(flat_index, point, weight_product).
template <typename Fn>
void for_each_node(const std::vector<GridAxis>& axes, int d, Fn&& fn) {
    std::vector<size_t> idx(axes.size(), 0);
    ParamPoint p;
    p.theta = Eigen::VectorXd(d);
    size_t flat = 0;
    for (;;) {
        double w = 1;
        for (size_t a = 0; a < axes.size(); ++a) w *= axes[a].weights[idx[a]];
        for (int i = 0; i < d; ++i) p.theta[i] = axes[i].nodes[idx[i]];
        p.gamma = axes[d].nodes[idx[d]];
        fn(flat, p, w);
        ++flat;
        int a = static_cast<int>(axes.size()) - 1;
        for (; a >= 0; --a) {
            if (++idx[a] < axes[a].nodes.size()) break;
            idx[a] = 0;
        }
        if (a < 0) return;
    }
}

}  // namespace

double PosteriorGrid::log_unnormalized(const ParamPoint& p) const {
    const double ll = loglik(p);
    if (ll == -kInf) return -kInf;
    return ll + prior.log_density(model, p, quad_cfg);
}

double PosteriorGrid::log_density(const ParamPoint& p) const {
    return log_unnormalized(p) - log_z;
}

double PosteriorGrid::density(const ParamPoint& p) const {
    const double ld = log_density(p);
    return ld == -kInf ? 0.0 : std::exp(ld);
}

PosteriorGrid posterior_grid(const ModelSpec& m, const Sample& sample, const PriorSpec& prior,
                             const GridConfig& grid, const QuadratureConfig& cfg) {
    if (grid.theta_panels < 1 || grid.gamma_panels < 1 || grid.points_per_panel < 2 ||
        !(grid.theta_halfwidth_sd > 0) || !(grid.gamma_efolds > 0))
        throw ConfigError("invalid posterior grid configuration");

    PosteriorGrid post;
    post.model = m;
    post.prior = prior;
    post.sample = sample;
    post.grid_cfg = grid;
    post.quad_cfg = cfg;
    post.mle = fit_mle(m, sample, cfg);
    if (post.mle.degenerate)
        throw DomainError("posterior grid requires a non-degenerate MLE fit");
    const double n = static_cast<double>(sample.size());

    const Eigen::MatrixXd ginv = post.mle.g_theta_hat.inverse();
    post.axes.reserve(static_cast<size_t>(m.d) + 1);
    for (int i = 0; i < m.d; ++i) {
        const double sd = std::sqrt(ginv(i, i) / n);
        double lo = post.mle.theta_hat[i] - grid.theta_halfwidth_sd * sd;
        double hi = post.mle.theta_hat[i] + grid.theta_halfwidth_sd * sd;
        lo = std::max(lo, m.theta_domain[static_cast<size_t>(i)].lo);
        hi = std::min(hi, m.theta_domain[static_cast<size_t>(i)].hi);
        post.axes.push_back(build_axis(lo, hi, grid.theta_panels, grid.points_per_panel));
    }
    {
        const double top = post.mle.gamma_hat;
        double lo = top - grid.gamma_efolds / (n * post.mle.c_hat);
        lo = std::max(lo, m.trunc_interval.lo);
        post.axes.push_back(build_axis(lo, top, grid.gamma_panels, grid.points_per_panel));
    }

    post.loglik = make_loglik(m, sample);
    size_t total = 1;
    for (const GridAxis& ax : post.axes) total *= ax.nodes.size();
    post.log_post.resize(total);
    double max_lw = -kInf;
    std::vector<double> lw(total);
    for_each_node(post.axes, m.d, [&](size_t flat, const ParamPoint& p, double w) {
        const double lp = post.log_unnormalized(p);
        post.log_post[flat] = lp;
        lw[flat] = lp + std::log(w);
        max_lw = std::max(max_lw, lw[flat]);
    });
    if (!(max_lw > -kInf)) throw Error("posterior is zero everywhere on the grid");
    double acc = 0;
    for (double v : lw) acc += std::exp(v - max_lw);
    post.log_z = max_lw + std::log(acc);
    if (!std::isfinite(post.log_z)) throw Error("posterior normalizer is not finite");
    return post;
}

std::pair<Eigen::VectorXd, double> posterior_means(const PosteriorGrid& post) {
    const int d = post.model.d;
    Eigen::VectorXd tbar = Eigen::VectorXd::Zero(d);
    double gbar = 0;
    for_each_node(post.axes, d, [&](size_t flat, const ParamPoint& p, double w) {
        const double mass = w * std::exp(post.log_post[flat] - post.log_z);
        tbar += mass * p.theta;
        gbar += mass * p.gamma;
    });
    return {tbar, gbar};
}

namespace {

// Stored-grid mass over tuples whose axis-k node index is < cutoff.
double mass_below(const PosteriorGrid& post, int k, size_t cutoff) {
    size_t stride = 1;
    for (size_t a = post.axes.size() - 1; a > static_cast<size_t>(k); --a)
        stride *= post.axes[a].nodes.size();
    const size_t nk = post.axes[static_cast<size_t>(k)].nodes.size();
    double mass = 0;
    for_each_node(post.axes, post.model.d, [&](size_t flat, const ParamPoint&, double w) {
        if ((flat / stride) % nk < cutoff) mass += w * std::exp(post.log_post[flat] - post.log_z);
    });
    return mass;
}

// Mass with axis k restricted to the provided node/weight list (already
// positioned in real coordinates). Evaluates fresh posterior values.
double restricted_mass(const PosteriorGrid& post, int k, const std::vector<double>& nodes,
                       const std::vector<double>& weights) {
    const int d = post.model.d;
    std::vector<GridAxis> axes = post.axes;
    GridAxis replacement;
    replacement.edges = {nodes.empty() ? 0 : nodes.front(), nodes.empty() ? 0 : nodes.back()};
    replacement.nodes = nodes;
    replacement.weights = weights;
    axes[static_cast<size_t>(k)] = replacement;
    double mass = 0;
    for_each_node(axes, d, [&](size_t, const ParamPoint& p, double w) {
        const double lp = post.log_unnormalized(p);
        if (lp != -kInf) mass += w * std::exp(lp - post.log_z);
    });
    return mass;
}

}  // namespace

CdfValue axis_cdf(const PosteriorGrid& post, int axis, double x0) {
    const int d = post.model.d;
    if (axis < 0 || axis > d) throw DomainError("axis out of range");
    const GridAxis& ax = post.axes[static_cast<size_t>(axis)];
    if (x0 >= ax.hi()) return {1.0, x0 > ax.hi()};
    if (x0 <= ax.lo()) return {0.0, x0 < ax.lo()};

    // Full panels strictly below the straddled one contribute stored mass.
    const int ppp = post.grid_cfg.points_per_panel;
    size_t panel = 0;
    while (ax.edges[panel + 1] <= x0) ++panel;
    const size_t cutoff = panel * static_cast<size_t>(ppp);  // nodes below the straddled panel
    double mass = cutoff > 0 ? mass_below(post, axis, cutoff) : 0.0;

    const double a = ax.edges[panel];
    if (x0 > a) {
        const GaussRule& rule = gauss_legendre(ppp);
        const double h = 0.5 * (x0 - a);
        std::vector<double> nodes(static_cast<size_t>(ppp)), weights(static_cast<size_t>(ppp));
        for (int q = 0; q < ppp; ++q) {
            nodes[static_cast<size_t>(q)] = a + h * (rule.nodes[q] + 1);
            weights[static_cast<size_t>(q)] = h * rule.weights[q];
        }
        mass += restricted_mass(post, axis, nodes, weights);
    }
    return {std::clamp(mass, 0.0, 1.0), false};
}

double axis_marginal_density(const PosteriorGrid& post, int axis, double x0) {
    const int d = post.model.d;
    if (axis < 0 || axis > d) throw DomainError("axis out of range");
    std::vector<double> nodes{x0}, weights{1.0};
    return restricted_mass(post, axis, nodes, weights);
}

namespace {

struct PivotMap {
    int axis = 0;
    double origin = 0;
    double scale = 1;  // coordinate = origin + scale * z
};

PivotMap pivot_map(const PosteriorGrid& post, PivotKind kind, int component) {
    const int d = post.model.d;
    PivotMap pm;
    const double n = static_cast<double>(post.mle.n);
    if (kind == PivotKind::T) {
        pm.axis = d;
        pm.origin = post.mle.gamma_hat;
        pm.scale = 1.0 / (n * post.mle.c_hat);
    } else {
        if (component < 0 || component >= d) throw DomainError("pivot component out of range");
        pm.axis = component;
        pm.origin = post.mle.theta_hat[component];
        const Eigen::MatrixXd ginv = post.mle.g_theta_hat.inverse();
        pm.scale = std::sqrt(ginv(component, component)) / std::sqrt(n);
    }
    return pm;
}

}  // namespace

CdfValue pivot_cdf(const PosteriorGrid& post, PivotKind kind, double z, int component) {
    const PivotMap pm = pivot_map(post, kind, component);
    return axis_cdf(post, pm.axis, pm.origin + pm.scale * z);
}

double pivot_quantile(const PosteriorGrid& post, PivotKind kind, double prob, int component) {
    if (!(prob > 0) || !(prob < 1)) throw DomainError("quantile probability must be in (0, 1)");
    const PivotMap pm = pivot_map(post, kind, component);
    const GridAxis& ax = post.axes[static_cast<size_t>(pm.axis)];
    double zlo = (ax.lo() - pm.origin) / pm.scale;
    double zhi = (ax.hi() - pm.origin) / pm.scale;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (zlo + zhi);
        if (axis_cdf(post, pm.axis, pm.origin + pm.scale * mid).p < prob)
            zlo = mid;
        else
            zhi = mid;
    }
    return 0.5 * (zlo + zhi);
}

std::string posterior_to_json(const PosteriorGrid& post) {
    nlohmann::json j;
    j["model"] = post.model.name;
    j["prior"] = post.prior.name;
    j["n"] = post.mle.n;
    j["log_z"] = post.log_z;
    j["mle"] = {{"theta_hat", std::vector<double>(post.mle.theta_hat.data(),
                                                  post.mle.theta_hat.data() + post.mle.theta_hat.size())},
                {"gamma_hat", post.mle.gamma_hat},
                {"c_hat", post.mle.c_hat},
                {"gamma_star", post.mle.gamma_star}};
    nlohmann::json axes = nlohmann::json::array();
    for (size_t a = 0; a < post.axes.size(); ++a) {
        axes.push_back({{"name", a + 1 == post.axes.size() ? std::string("gamma")
                                                           : "theta_" + std::to_string(a + 1)},
                        {"edges", post.axes[a].edges},
                        {"nodes", post.axes[a].nodes},
                        {"weights", post.axes[a].weights}});
    }
    j["axes"] = std::move(axes);
    j["log_post"] = post.log_post;
    return j.dump(2);
}

}  // namespace truncgeo
