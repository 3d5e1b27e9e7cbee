#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>

#include "truncgeo/model.hpp"
#include "truncgeo/quadrature.hpp"

namespace truncgeo {

enum class PriorTag { Jeffreys, AlphaParallel, ExtendedVolume, Custom };

// A prior over (theta, gamma) as a log-density plus gradient. Gradients fall
// back to central differences of log_pi when no closed form is attached.
struct PriorSpec {
    PriorTag tag = PriorTag::Custom;
    std::string name;
    double alpha = 0;  // AlphaParallel
    double rho = 0, tau = 0;  // ExtendedVolume

    // log pi(theta, gamma), up to an additive constant.
    std::function<double(const ModelSpec&, const ParamPoint&, const QuadratureConfig&)> log_pi;
    // (d/dtheta log pi, d/dgamma log pi); empty -> finite differences.
    std::function<std::pair<Eigen::VectorXd, double>(const ModelSpec&, const ParamPoint&,
                                                     const QuadratureConfig&)>
        grad_log_pi_closed;

    double log_density(const ModelSpec& m, const ParamPoint& p,
                       const QuadratureConfig& cfg = {}) const;
    std::pair<Eigen::VectorXd, double> grad_log_density(const ModelSpec& m, const ParamPoint& p,
                                                        const QuadratureConfig& cfg = {}) const;
};

PriorSpec flat_prior();
PriorSpec jeffreys_prior();                                 // log e_{0,0} = log sqrt(det g)
PriorSpec alpha_parallel_prior(double alpha);               // log e_{0,alpha/2}; oTEF only
PriorSpec extended_volume_prior(double rho, double tau);    // log e_{rho,tau}
// pi given directly by an expression over theta_i and gamma; must evaluate
// to a positive value wherever the prior is used.
PriorSpec expression_prior(const std::string& pi_expression);
// Arbitrary log-density for tests and embedding.
PriorSpec custom_prior(std::string name,
                       std::function<double(const ModelSpec&, const ParamPoint&,
                                            const QuadratureConfig&)> log_pi);

// Registry used by the CLI and experiment configs: "flat", "jeffreys",
// "alpha_parallel:<a>", "extended_volume:<rho>,<tau>", anything else is
// parsed as a pi expression (e.g. "1/theta").
PriorSpec make_prior(const std::string& text);

}  // namespace truncgeo
