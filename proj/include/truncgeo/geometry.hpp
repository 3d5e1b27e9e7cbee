#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "truncgeo/expectations.hpp"
#include "truncgeo/model.hpp"

namespace truncgeo {

// Everything the information geometry of the model provides at one point.
// Coordinates are ordered (theta_1..theta_d, gamma); gamma is index d in the
// full-coordinate Christoffel array.
struct GeometryAt {
    ParamPoint point;
    Eigen::MatrixXd g_theta;      // regular block, -A^(2,0)
    Eigen::MatrixXd g_theta_inv;
    double g_gammagamma = 0;      // c^2
    double c = 0;                 // A^(0,1)
    Eigen::VectorXd a11;          // A^(1,1)
    ATensor a21;                  // A^(2,1), d^2
    ATensor a30;                  // A^(3,0), d^3
    double a02 = 0;               // A^(0,2)
    std::vector<double> christoffel_g;  // Gamma^g_{ab,c}, (d+1)^3 flat
    // Regular-block alpha connection Gamma^alpha_{ij,k} (d^3 flat).
    std::function<ATensor(double)> alpha_christoffel;

    double christoffel(int a, int b, int cidx) const;  // full-coordinate lookup
};

GeometryAt geometry_at(const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg = {},
                       ATensorMode mode = ATensorMode::Auto);

// Metric as a function of the point: diag(g_theta, c^2) blocks.
Eigen::MatrixXd metric_full(const ModelSpec& m, const ParamPoint& p,
                            const QuadratureConfig& cfg = {},
                            ATensorMode mode = ATensorMode::Auto);

struct TangentVector {
    Eigen::VectorXd d_theta;
    double d_gamma = 1;
};

// chi = d_gamma + A^(1,1)_i g^{ij} d_j, the direction that preserves the
// expectation parameter.
TangentVector chi_vector(const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg = {});

// e_{rho,tau} = (det g_theta)^(rho + 1/2) (g_gammagamma)^(tau + 1/2).
double extended_volume(const ModelSpec& m, const ParamPoint& p, double rho, double tau,
                       const QuadratureConfig& cfg = {});

// Expectation-parameter map eta(theta, gamma) and its inverse at fixed gamma.
Eigen::VectorXd eta_forward(const ModelSpec& m, const ParamPoint& p,
                            const QuadratureConfig& cfg = {});
Eigen::VectorXd eta_inverse(const ModelSpec& m, const Eigen::VectorXd& eta, double gamma,
                            const Eigen::VectorXd* theta_start = nullptr,
                            const QuadratureConfig& cfg = {});

enum class StreamStatus { Complete, ExitedDomain };

struct StreamNode {
    double s = 0;
    ParamPoint point;
    Eigen::VectorXd eta;
};

struct Streamline {
    std::vector<StreamNode> nodes;
    StreamStatus status = StreamStatus::Complete;
};

// Fixed-step RK4 integration of dp/ds = chi(p) from `start` to arc parameter
// s_max, recording every accepted node. Stops early (status ExitedDomain)
// when a stage or step would leave the parameter domain.
Streamline trace_streamline(const ModelSpec& m, const ParamPoint& start, double s_max,
                            double step = 1e-3, const QuadratureConfig& cfg = {});

// CSV with columns s, theta_1..theta_d, gamma, eta_1..eta_d, status.
std::string streamline_csv(const Streamline& line, int d);

}  // namespace truncgeo
