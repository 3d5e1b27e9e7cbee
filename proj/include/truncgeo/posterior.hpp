#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "truncgeo/mle.hpp"
#include "truncgeo/model.hpp"
#include "truncgeo/prior.hpp"
#include "truncgeo/quadrature.hpp"

namespace truncgeo {

// Composite Gauss-Legendre tensor grid for the exact posterior.
// theta axes span +-theta_halfwidth_sd posterior standard deviations around
// the MLE; the gamma axis spans gamma_efolds natural-log units of posterior
// decay below the sample minimum, i.e. (x_(1) - gamma_efolds/(n c_hat), x_(1)].
struct GridConfig {
    int theta_panels = 10;
    int gamma_panels = 12;
    int points_per_panel = 8;
    double theta_halfwidth_sd = 8.0;
    double gamma_efolds = 40.0;
};

struct GridAxis {
    std::vector<double> edges;    // panel boundaries, ascending
    std::vector<double> nodes;    // interior Gauss nodes, ascending
    std::vector<double> weights;
    double lo() const { return edges.front(); }
    double hi() const { return edges.back(); }
};

class PosteriorGrid {
  public:
    ModelSpec model;
    PriorSpec prior;
    Sample sample;
    MleResult mle;
    GridConfig grid_cfg;
    QuadratureConfig quad_cfg;
    std::vector<GridAxis> axes;      // d theta axes, then the gamma axis
    std::vector<double> log_post;    // unnormalized log posterior, last axis fastest
    double log_z = 0;                // log sum of weight * exp(log_post)

    // log prior + log likelihood (unnormalized posterior) at an arbitrary
    // point; -inf outside the support.
    double log_unnormalized(const ParamPoint& p) const;
    // Normalized posterior log-density / density over (theta, gamma).
    double log_density(const ParamPoint& p) const;
    double density(const ParamPoint& p) const;

    std::function<double(const ParamPoint&)> loglik;  // set by posterior_grid
};

PosteriorGrid posterior_grid(const ModelSpec& m, const Sample& sample, const PriorSpec& prior,
                             const GridConfig& grid = {}, const QuadratureConfig& cfg = {});

// Posterior means of (theta, gamma).
std::pair<Eigen::VectorXd, double> posterior_means(const PosteriorGrid& post);

struct CdfValue {
    double p = 0;
    bool clamped = false;  // query fell outside the grid's representable range
};

// P(coordinate_k <= x0 | X); axis d is gamma. Full panels below x0 reuse the
// stored grid; the straddled panel is re-integrated on [edge, x0].
CdfValue axis_cdf(const PosteriorGrid& post, int axis, double x0);

// Marginal posterior density of coordinate_k at x0 (other axes integrated out).
double axis_marginal_density(const PosteriorGrid& post, int axis, double x0);

enum class PivotKind { T, U };

// Posterior CDF of the pivot: T = n c_hat (gamma - gamma_hat) <= z, or the
// standardized U^i: sqrt(n) (theta_i - theta_hat_i) / sigma_i <= z with
// sigma_i = sqrt((g_theta_hat^{-1})_{ii}). `component` indexes theta for U.
CdfValue pivot_cdf(const PosteriorGrid& post, PivotKind kind, double z, int component = 0);

// Inverse of pivot_cdf in z by bisection over the grid's range.
double pivot_quantile(const PosteriorGrid& post, PivotKind kind, double prob, int component = 0);

// JSON text with the grid nodes, log-densities, and normalizer.
std::string posterior_to_json(const PosteriorGrid& post);

}  // namespace truncgeo
