#pragma once

#include <Eigen/Dense>
#include <vector>

#include "truncgeo/mle.hpp"
#include "truncgeo/model.hpp"
#include "truncgeo/prior.hpp"
#include "truncgeo/tensor.hpp"

namespace truncgeo {

// Everything the posterior expansion needs, frozen at the MLE: hat-tensors
// as sample averages, the prior and its derivatives at the fitted point, and
// the inverse metric. Works in the local coordinates
// u = sqrt(n) (theta - theta_hat), t = n c_hat (gamma - gamma_hat) <= 0.
struct ExpansionStats {
    MleResult mle;
    ATensor a11_hat;               // d
    ATensor a21_hat;               // d^2
    ATensor a30_hat;               // d^3
    ATensor a40_hat;               // d^4
    double a02_hat = 0;
    Eigen::VectorXd dlogpi_theta;  // D pi_hat / pi_hat
    double dlogpi_gamma = 0;       // d_gamma pi_hat / pi_hat
    std::vector<double> d2pi_over_pi;  // D^2 pi_hat / pi_hat, flat d^2
    Eigen::MatrixXd g_inv;
    std::vector<double> vec_ginv;  // flat d^2
};

ExpansionStats expansion_stats(const ModelSpec& m, const Sample& sample, const PriorSpec& prior,
                               const QuadratureConfig& cfg = {});

// Density of (u, t) truncated at the requested order (0, 1, or 2):
// leading Gaussian-x-exponential factor times [1 + B1/sqrt(n) + B2/n].
double expansion_density(const ExpansionStats& stats, const Eigen::VectorXd& u, double t,
                         int order);

// The correction polynomials themselves (for diagnostics and tests).
double expansion_b1(const ExpansionStats& stats, const Eigen::VectorXd& u, double t);
double expansion_b2(const ExpansionStats& stats, const Eigen::VectorXd& u, double t);

}  // namespace truncgeo
