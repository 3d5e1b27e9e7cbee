#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "truncgeo/model.hpp"
#include "truncgeo/posterior.hpp"
#include "truncgeo/prior.hpp"

namespace truncgeo {

// Monte Carlo experiment over (prior x n) cells. Per-replication seeds are
// derived from (master_seed, n, prior index, replication index), so reports
// are identical for any worker_count.
struct ExperimentConfig {
    std::string model = "trunc_exp";
    ParamPoint true_point;
    std::vector<std::string> priors;       // registry texts (see make_prior)
    std::vector<std::size_t> n_values;
    std::size_t replications = 1000;       // >= 100
    std::vector<double> levels;            // coverage experiments
    PivotKind pivot = PivotKind::T;
    int pivot_component = 0;
    std::uint64_t master_seed = 1;
    int worker_count = 1;
    GridConfig grid;
    QuadratureConfig quad;
};

struct CoverageCell {
    std::string prior;
    std::size_t n = 0;
    double level = 0;
    double coverage = 0;
    double se = 0;
    std::size_t degenerate = 0;
    std::size_t effective = 0;
    bool valid = false;
};

struct CoverageReport {
    ExperimentConfig config;
    std::vector<CoverageCell> cells;
};

struct MomentCell {
    std::string prior;
    std::size_t n = 0;
    double mean_gamma_gap = 0;     // gamma_B - gamma_star
    double se_gamma_gap = 0;
    double mean_n2_gamma_gap = 0;  // n^2 (gamma_B - gamma_star)
    double se_n2_gamma_gap = 0;
    std::vector<double> mean_n_theta_gap;  // n (theta_B - theta_hat), per component
    std::vector<double> se_n_theta_gap;
    std::size_t degenerate = 0;
    std::size_t effective = 0;
    bool valid = false;
};

struct MomentSlope {
    std::string prior;
    double slope = 0;      // log |mean gamma gap| vs log n
    double ci_halfwidth = 0;  // ~95% half-width; 0 when not estimable
    bool valid = false;
};

struct MomentReport {
    ExperimentConfig config;
    std::vector<MomentCell> cells;
    std::vector<MomentSlope> slopes;
};

// Parse a configuration from JSON text. Keys: model (registry name),
// true_theta (array), true_gamma, priors, n_values, replications, levels,
// pivot ("T" or "U<i>"), master_seed, worker_count, grid (object). Unknown
// keys and type mismatches raise ConfigError.
ExperimentConfig experiment_config_from_json(const std::string& text);

CoverageReport run_coverage(const ExperimentConfig& cfg);
MomentReport run_moment(const ExperimentConfig& cfg);

std::string report_to_json(const CoverageReport& report);
std::string report_to_json(const MomentReport& report);
std::string report_to_csv(const CoverageReport& report);
std::string report_to_csv(const MomentReport& report);

// format is "json" or "csv".
void write_report(const CoverageReport& report, const std::string& path,
                  const std::string& format);
void write_report(const MomentReport& report, const std::string& path, const std::string& format);

}  // namespace truncgeo
