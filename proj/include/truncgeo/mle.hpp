#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "truncgeo/model.hpp"
#include "truncgeo/quadrature.hpp"

namespace truncgeo {

struct MleResult {
    Eigen::VectorXd theta_hat;
    double gamma_hat = 0;           // sample minimum
    double c_hat = 0;
    Eigen::MatrixXd g_theta_hat;
    double gamma_star = 0;          // bias-adjusted: gamma_hat - 1/(n c_hat)
    std::size_t n = 0;
    bool converged = false;
    int iterations = 0;
    // True when Newton failed, c_hat <= 0, or g_theta_hat is not positive
    // definite; downstream posterior/pivot machinery rejects such fits.
    bool degenerate = true;
};

// gamma_hat = min(sample); theta_hat by damped Newton on the likelihood
// equation sum_j D_theta log p(x_j; theta, gamma_hat) = 0, converged when the
// score norm drops below 1e-8. Requires n >= d + 1.
MleResult fit_mle(const ModelSpec& m, const Sample& sample, const QuadratureConfig& cfg = {});

}  // namespace truncgeo
