#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "truncgeo/quadrature.hpp"

namespace truncgeo {

struct ParamPoint {
    Eigen::VectorXd theta;
    double gamma = 0;
};

inline ParamPoint make_point(std::initializer_list<double> theta, double gamma) {
    ParamPoint p;
    p.theta = Eigen::VectorXd(static_cast<Eigen::Index>(theta.size()));
    Eigen::Index i = 0;
    for (double v : theta) p.theta[i++] = v;
    p.gamma = gamma;
    return p;
}

// Observations, kept sorted ascending so the minimum (the gamma MLE) is x[0].
struct Sample {
    std::vector<double> values;
    std::size_t size() const { return values.size(); }
    double min() const;
};

Sample make_sample(std::vector<double> values);

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

// A one-sided truncated family p(x; theta, gamma) = q(x; theta) e^{-psi} on
// [gamma, I2). Everything beyond d, the domains, and log_q is optional
// closed-form structure; operations fall back to quadrature or finite
// differences when a hook is absent.
struct ModelSpec {
    std::string name;
    int d = 1;
    std::vector<Interval> theta_domain;  // open box
    Interval trunc_interval;             // gamma lives in its interior

    std::function<double(double, const ParamPoint&)> log_q;

    std::function<double(const ParamPoint&)> psi_closed;
    // Mixed partial of psi: per-theta-coordinate orders plus gamma order.
    std::function<double(const ParamPoint&, const std::vector<int>&, int)> psi_partial_closed;
    // Mixed theta-partial of log q at fixed x.
    std::function<double(double, const ParamPoint&, const std::vector<int>&)> logq_partial_closed;

    // Exponential-family structure: log q = sum_i theta_i F_i(x) + M(x).
    bool is_otef = false;
    std::vector<std::function<double(double)>> F;
    std::function<double(double)> M;

    // Quantile x(u), u in [0, 1), of the normalized density. Doubles as the
    // sampling transform and as the expectation substitution.
    std::function<double(double, const ParamPoint&)> quantile;

    // Expectation-parameter map and inverse (where closed form is known).
    std::function<Eigen::VectorXd(const ParamPoint&)> eta_closed;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> eta_inverse_closed;

    // Scale for the rational tail substitution x = gamma + scale * u/(1-u).
    std::function<double(const ParamPoint&)> tail_scale;

    // Starting point for the MLE Newton iteration.
    std::function<Eigen::VectorXd(const Sample&, double)> theta_init;

    bool theta_in_domain(const Eigen::VectorXd& theta) const;
    bool in_domain(const ParamPoint& p) const;
    void check_point(const ParamPoint& p) const;  // throws DomainError
};

// Registry: trunc_exp, trunc_normal_natural, trunc_normal_meansd.
ModelSpec make_model(const std::string& name);
std::vector<std::string> model_names();

// User-assembled exponential family.
struct OtefConfig {
    std::string name = "otef";
    int d = 1;
    std::vector<std::function<double(double)>> F;
    std::function<double(double)> M;  // defaults to 0
    std::vector<Interval> theta_domain;  // empty means unbounded in every coordinate
    Interval trunc_interval;
    std::function<double(const ParamPoint&)> psi_closed;  // optional
    double tail_scale = 1.0;
};
ModelSpec make_otef(OtefConfig cfg);

// log of the normalizer correction: psi = log integral_gamma^I2 q dx.
double psi_value(const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg = {});

// Mixed partial of psi (closed form if present, else central differences of
// psi_value).
double psi_partial(const ModelSpec& m, const ParamPoint& p, const std::vector<int>& theta_orders,
                   int gamma_order, const QuadratureConfig& cfg = {});

// log p(x; theta, gamma); x = gamma returns the right limit.
double log_density(const ModelSpec& m, double x, const ParamPoint& p,
                   const QuadratureConfig& cfg = {});

// Mixed partial of log p in (theta, gamma) at fixed x; requires x strictly
// inside the support. theta_orders has one entry per coordinate.
double log_density_partial(const ModelSpec& m, double x, const ParamPoint& p,
                           const std::vector<int>& theta_orders, int gamma_order,
                           const QuadratureConfig& cfg = {});

// Same, indexed by theta component tuple (i_1..i_r) plus gamma order.
double log_density_partial_tuple(const ModelSpec& m, double x, const ParamPoint& p,
                                 const std::vector<int>& theta_components, int gamma_order,
                                 const QuadratureConfig& cfg = {});

Sample draw_sample(const ModelSpec& m, const ParamPoint& p, std::size_t n, std::uint64_t seed);

// Log likelihood evaluator over a fixed sample, reduced to sufficient
// statistics where the model allows it.
std::function<double(const ParamPoint&)> make_loglik(const ModelSpec& m, const Sample& sample);

}  // namespace truncgeo
