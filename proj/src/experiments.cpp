#include "truncgeo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "truncgeo/errors.hpp"
#include "truncgeo/mle.hpp"
#include "truncgeo/rng.hpp"
#include "truncgeo/version.hpp"

namespace truncgeo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate(const ExperimentConfig& cfg, const ModelSpec& m, bool needs_levels) {
    if (cfg.replications < 100) throw ConfigError("replications must be at least 100");
    if (cfg.priors.empty()) throw ConfigError("no priors configured");
    if (cfg.n_values.empty()) throw ConfigError("no sample sizes configured");
    for (std::size_t n : cfg.n_values)
        if (n < static_cast<std::size_t>(m.d) + 1)
            throw ConfigError("sample sizes must be at least d + 1");
    if (needs_levels) {
        if (cfg.levels.empty()) throw ConfigError("no nominal levels configured");
        for (double l : cfg.levels)
            if (!(l > 0) || !(l < 1)) throw ConfigError("nominal levels must lie in (0, 1)");
    }
    if (cfg.worker_count < 1) throw ConfigError("worker_count must be positive");
    if (cfg.pivot == PivotKind::U &&
        (cfg.pivot_component < 0 || cfg.pivot_component >= m.d))
        throw ConfigError("pivot component out of range");
    m.check_point(cfg.true_point);
}

struct RepOutcome {
    bool degenerate = true;
    double stat = 0;                   // coverage: posterior CDF at the true pivot value
    double gamma_gap = 0;              // moment: gamma_B - gamma_star
    std::vector<double> theta_gap;     // moment: theta_B - theta_hat
};

// Runs one replication; `coverage` selects which statistics are produced.
RepOutcome run_rep(const ModelSpec& m, const ExperimentConfig& cfg, const PriorSpec& prior,
                   std::size_t n, std::uint64_t seed, bool coverage) {
    RepOutcome out;
    const Sample sample = draw_sample(m, cfg.true_point, n, seed);
    MleResult mle = fit_mle(m, sample, cfg.quad);
    if (mle.degenerate) return out;
    PosteriorGrid post = posterior_grid(m, sample, prior, cfg.grid, cfg.quad);
    out.degenerate = false;
    if (coverage) {
        double pivot_true;
        if (cfg.pivot == PivotKind::T) {
            pivot_true = static_cast<double>(n) * mle.c_hat * (cfg.true_point.gamma - mle.gamma_hat);
        } else {
            const Eigen::MatrixXd ginv = mle.g_theta_hat.inverse();
            const int i = cfg.pivot_component;
            pivot_true = std::sqrt(static_cast<double>(n)) *
                         (cfg.true_point.theta[i] - mle.theta_hat[i]) / std::sqrt(ginv(i, i));
        }
        out.stat = pivot_cdf(post, cfg.pivot, pivot_true, cfg.pivot_component).p;
    } else {
        auto [theta_bar, gamma_bar] = posterior_means(post);
        out.gamma_gap = gamma_bar - mle.gamma_star;
        out.theta_gap.resize(static_cast<size_t>(m.d));
        for (int i = 0; i < m.d; ++i) out.theta_gap[static_cast<size_t>(i)] = theta_bar[i] - mle.theta_hat[i];
    }
    return out;
}

// Fills outcomes[0..R) deterministically; replication r uses
// seed_for(master, n, prior_index, r) regardless of scheduling.
void run_cell(const ModelSpec& m, const ExperimentConfig& cfg, const PriorSpec& prior,
              std::size_t prior_index, std::size_t n, bool coverage,
              std::vector<RepOutcome>& outcomes) {
    const std::size_t reps = cfg.replications;
    outcomes.assign(reps, RepOutcome{});
    const int workers = std::min<int>(cfg.worker_count, static_cast<int>(reps));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto work = [&](std::size_t begin, std::size_t end) {
        try {
            for (std::size_t r = begin; r < end; ++r) {
                const std::uint64_t seed = seed_for(cfg.master_seed, n, prior_index, r);
                outcomes[r] = run_rep(m, cfg, prior, n, seed, coverage);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };
    if (workers <= 1) {
        work(0, reps);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            const std::size_t begin = reps * static_cast<size_t>(w) / static_cast<size_t>(workers);
            const std::size_t end = reps * (static_cast<size_t>(w) + 1) / static_cast<size_t>(workers);
            pool.emplace_back(work, begin, end);
        }
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
}

struct MeanSe {
    double mean = kNaN;
    double se = kNaN;
};

// Deterministic two-pass mean and standard error in replication order.
MeanSe mean_se(const std::vector<double>& xs) {
    if (xs.empty()) return {};
    double sum = 0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    if (xs.size() == 1) return {mean, kNaN};
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["model"] = cfg.model;
    j["true_theta"] = std::vector<double>(cfg.true_point.theta.data(),
                                          cfg.true_point.theta.data() + cfg.true_point.theta.size());
    j["true_gamma"] = cfg.true_point.gamma;
    j["priors"] = cfg.priors;
    j["n_values"] = cfg.n_values;
    j["replications"] = cfg.replications;
    j["levels"] = cfg.levels;
    j["pivot"] = cfg.pivot == PivotKind::T
                     ? std::string("T")
                     : "U" + std::to_string(cfg.pivot_component + 1);
    // worker_count is deliberately not echoed: reports must be byte-identical
    // across worker counts.
    j["master_seed"] = cfg.master_seed;
    j["grid"] = {{"theta_panels", cfg.grid.theta_panels},
                 {"gamma_panels", cfg.grid.gamma_panels},
                 {"points_per_panel", cfg.grid.points_per_panel},
                 {"theta_halfwidth_sd", cfg.grid.theta_halfwidth_sd},
                 {"gamma_efolds", cfg.grid.gamma_efolds}};
    return j;
}

nlohmann::json number_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_number(double v) { return std::isfinite(v) ? fmt17(v) : std::string(); }

std::string csv_header_block(const ExperimentConfig& cfg, const char* kind) {
    std::string s;
    s += "# tool: truncgeo ";
    s += kVersion;
    s += "\n# kind: ";
    s += kind;
    s += "\n# config: ";
    s += config_to_json(cfg).dump();
    s += "\n";
    return s;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
    namespace nj = nlohmann;
    ExperimentConfig cfg;
    try {
        const nj::json j = nj::json::parse(text);
        static const std::vector<std::string> allowed = {
            "model",  "true_theta",   "true_gamma",  "priors", "n_values", "replications",
            "levels", "pivot",        "master_seed", "worker_count", "grid"};
        for (auto it = j.begin(); it != j.end(); ++it)
            if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
                throw ConfigError("unknown key \"" + it.key() + "\" in experiment config");
        if (j.contains("model")) cfg.model = j["model"].get<std::string>();
        if (j.contains("true_theta")) {
            const auto v = j["true_theta"].get<std::vector<double>>();
            cfg.true_point.theta =
                Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        if (j.contains("true_gamma")) cfg.true_point.gamma = j["true_gamma"].get<double>();
        if (j.contains("priors")) cfg.priors = j["priors"].get<std::vector<std::string>>();
        if (j.contains("n_values")) cfg.n_values = j["n_values"].get<std::vector<std::size_t>>();
        if (j.contains("replications")) cfg.replications = j["replications"].get<std::size_t>();
        if (j.contains("levels")) cfg.levels = j["levels"].get<std::vector<double>>();
        if (j.contains("pivot")) {
            const std::string p = j["pivot"].get<std::string>();
            if (p == "T") {
                cfg.pivot = PivotKind::T;
            } else if (!p.empty() && p[0] == 'U') {
                cfg.pivot = PivotKind::U;
                cfg.pivot_component = p.size() == 1 ? 0 : std::stoi(p.substr(1)) - 1;
            } else {
                throw ConfigError("pivot must be T or U<i>");
            }
        }
        if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
        if (j.contains("worker_count")) cfg.worker_count = j["worker_count"].get<int>();
        if (j.contains("grid")) {
            const nj::json& g = j["grid"];
            static const std::vector<std::string> grid_keys = {
                "theta_panels", "gamma_panels", "points_per_panel", "theta_halfwidth_sd",
                "gamma_efolds"};
            for (auto it = g.begin(); it != g.end(); ++it)
                if (std::find(grid_keys.begin(), grid_keys.end(), it.key()) == grid_keys.end())
                    throw ConfigError("unknown key \"" + it.key() + "\" in grid config");
            cfg.grid.theta_panels = g.value("theta_panels", cfg.grid.theta_panels);
            cfg.grid.gamma_panels = g.value("gamma_panels", cfg.grid.gamma_panels);
            cfg.grid.points_per_panel = g.value("points_per_panel", cfg.grid.points_per_panel);
            cfg.grid.theta_halfwidth_sd =
                g.value("theta_halfwidth_sd", cfg.grid.theta_halfwidth_sd);
            cfg.grid.gamma_efolds = g.value("gamma_efolds", cfg.grid.gamma_efolds);
        }
    } catch (const nj::json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw ConfigError("malformed pivot component");
    }
    return cfg;
}

CoverageReport run_coverage(const ExperimentConfig& cfg) {
    const ModelSpec m = make_model(cfg.model);
    validate(cfg, m, true);
    CoverageReport report;
    report.config = cfg;
    std::vector<RepOutcome> outcomes;
    for (std::size_t pi = 0; pi < cfg.priors.size(); ++pi) {
        const PriorSpec prior = make_prior(cfg.priors[pi]);
        for (std::size_t n : cfg.n_values) {
            run_cell(m, cfg, prior, pi, n, true, outcomes);
            std::size_t degenerate = 0;
            for (const RepOutcome& o : outcomes) degenerate += o.degenerate ? 1 : 0;
            const std::size_t effective = outcomes.size() - degenerate;
            for (double level : cfg.levels) {
                CoverageCell cell;
                cell.prior = cfg.priors[pi];
                cell.n = n;
                cell.level = level;
                cell.degenerate = degenerate;
                cell.effective = effective;
                cell.valid = effective > 0;
                if (cell.valid) {
                    std::size_t covered = 0;
                    for (const RepOutcome& o : outcomes)
                        if (!o.degenerate && o.stat <= level) ++covered;
                    cell.coverage =
                        static_cast<double>(covered) / static_cast<double>(effective);
                    cell.se = std::sqrt(cell.coverage * (1 - cell.coverage) /
                                        static_cast<double>(effective));
                } else {
                    cell.coverage = kNaN;
                    cell.se = kNaN;
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

MomentReport run_moment(const ExperimentConfig& cfg) {
    const ModelSpec m = make_model(cfg.model);
    validate(cfg, m, false);
    MomentReport report;
    report.config = cfg;
    std::vector<RepOutcome> outcomes;
    for (std::size_t pi = 0; pi < cfg.priors.size(); ++pi) {
        const PriorSpec prior = make_prior(cfg.priors[pi]);
        std::vector<double> log_n, log_gap;
        for (std::size_t n : cfg.n_values) {
            run_cell(m, cfg, prior, pi, n, false, outcomes);
            MomentCell cell;
            cell.prior = cfg.priors[pi];
            cell.n = n;
            std::vector<double> gaps, n2gaps;
            std::vector<std::vector<double>> tgaps(static_cast<size_t>(m.d));
            for (const RepOutcome& o : outcomes) {
                if (o.degenerate) {
                    ++cell.degenerate;
                    continue;
                }
                const double nn = static_cast<double>(n);
                gaps.push_back(o.gamma_gap);
                n2gaps.push_back(nn * nn * o.gamma_gap);
                for (int i = 0; i < m.d; ++i)
                    tgaps[static_cast<size_t>(i)].push_back(nn * o.theta_gap[static_cast<size_t>(i)]);
            }
            cell.effective = gaps.size();
            cell.valid = cell.effective > 0;
            const MeanSe g = mean_se(gaps), g2 = mean_se(n2gaps);
            cell.mean_gamma_gap = g.mean;
            cell.se_gamma_gap = g.se;
            cell.mean_n2_gamma_gap = g2.mean;
            cell.se_n2_gamma_gap = g2.se;
            for (int i = 0; i < m.d; ++i) {
                const MeanSe t = mean_se(tgaps[static_cast<size_t>(i)]);
                cell.mean_n_theta_gap.push_back(t.mean);
                cell.se_n_theta_gap.push_back(t.se);
            }
            if (cell.valid && std::fabs(cell.mean_gamma_gap) > 0) {
                log_n.push_back(std::log(static_cast<double>(n)));
                log_gap.push_back(std::log(std::fabs(cell.mean_gamma_gap)));
            }
            report.cells.push_back(std::move(cell));
        }
        // least-squares decay slope of log |mean gamma gap| on log n
        MomentSlope slope;
        slope.prior = cfg.priors[pi];
        if (log_n.size() >= 2) {
            const std::size_t k = log_n.size();
            double mx = 0, my = 0;
            for (std::size_t i = 0; i < k; ++i) {
                mx += log_n[i];
                my += log_gap[i];
            }
            mx /= static_cast<double>(k);
            my /= static_cast<double>(k);
            double sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < k; ++i) {
                sxx += (log_n[i] - mx) * (log_n[i] - mx);
                sxy += (log_n[i] - mx) * (log_gap[i] - my);
            }
            slope.slope = sxy / sxx;
            slope.valid = true;
            if (k >= 3) {
                double rss = 0;
                for (std::size_t i = 0; i < k; ++i) {
                    const double fit = my + slope.slope * (log_n[i] - mx);
                    rss += (log_gap[i] - fit) * (log_gap[i] - fit);
                }
                const double se = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
                slope.ci_halfwidth = 2 * se;
            }
        }
        report.slopes.push_back(std::move(slope));
    }
    return report;
}

std::string report_to_json(const CoverageReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["tool"] = {{"name", "truncgeo"}, {"version", kVersion}};
    j["kind"] = "coverage";
    j["config"] = config_to_json(report.config);
    nlohmann::json cells = nlohmann::json::array();
    for (const CoverageCell& c : report.cells) {
        cells.push_back({{"prior", c.prior},
                         {"n", c.n},
                         {"level", c.level},
                         {"estimate", number_or_null(c.coverage)},
                         {"se", number_or_null(c.se)},
                         {"degenerate", c.degenerate},
                         {"effective", c.effective},
                         {"valid", c.valid}});
    }
    j["cells"] = std::move(cells);
    return j.dump(2) + "\n";
}

std::string report_to_json(const MomentReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["tool"] = {{"name", "truncgeo"}, {"version", kVersion}};
    j["kind"] = "moment";
    j["config"] = config_to_json(report.config);
    nlohmann::json cells = nlohmann::json::array();
    for (const MomentCell& c : report.cells) {
        nlohmann::json mt = nlohmann::json::array(), st = nlohmann::json::array();
        for (double v : c.mean_n_theta_gap) mt.push_back(number_or_null(v));
        for (double v : c.se_n_theta_gap) st.push_back(number_or_null(v));
        cells.push_back({{"prior", c.prior},
                         {"n", c.n},
                         {"mean_gamma_gap", number_or_null(c.mean_gamma_gap)},
                         {"se_gamma_gap", number_or_null(c.se_gamma_gap)},
                         {"mean_n2_gamma_gap", number_or_null(c.mean_n2_gamma_gap)},
                         {"se_n2_gamma_gap", number_or_null(c.se_n2_gamma_gap)},
                         {"mean_n_theta_gap", std::move(mt)},
                         {"se_n_theta_gap", std::move(st)},
                         {"degenerate", c.degenerate},
                         {"effective", c.effective},
                         {"valid", c.valid}});
    }
    j["cells"] = std::move(cells);
    nlohmann::json slopes = nlohmann::json::array();
    for (const MomentSlope& s : report.slopes) {
        slopes.push_back({{"prior", s.prior},
                          {"slope", s.valid ? nlohmann::json(s.slope) : nlohmann::json(nullptr)},
                          {"ci_halfwidth",
                           s.valid && s.ci_halfwidth > 0 ? nlohmann::json(s.ci_halfwidth)
                                                         : nlohmann::json(nullptr)}});
    }
    j["slopes"] = std::move(slopes);
    return j.dump(2) + "\n";
}

std::string report_to_csv(const CoverageReport& report) {
    std::string s = csv_header_block(report.config, "coverage");
    s += "prior,n,level,estimate,se,degenerate,effective,valid\n";
    for (const CoverageCell& c : report.cells) {
        s += c.prior + "," + std::to_string(c.n) + "," + fmt17(c.level) + "," +
             csv_number(c.coverage) + "," + csv_number(c.se) + "," + std::to_string(c.degenerate) +
             "," + std::to_string(c.effective) + "," + (c.valid ? "1" : "0") + "\n";
    }
    return s;
}

std::string report_to_csv(const MomentReport& report) {
    std::string s = csv_header_block(report.config, "moment");
    s += "prior,n,mean_gamma_gap,se_gamma_gap,mean_n2_gamma_gap,se_n2_gamma_gap,"
         "mean_n_theta_gap,se_n_theta_gap,degenerate,effective,valid\n";
    for (const MomentCell& c : report.cells) {
        std::string mt, st;
        for (size_t i = 0; i < c.mean_n_theta_gap.size(); ++i) {
            if (i) {
                mt += ";";
                st += ";";
            }
            mt += csv_number(c.mean_n_theta_gap[i]);
            st += csv_number(c.se_n_theta_gap[i]);
        }
        s += c.prior + "," + std::to_string(c.n) + "," + csv_number(c.mean_gamma_gap) + "," +
             csv_number(c.se_gamma_gap) + "," + csv_number(c.mean_n2_gamma_gap) + "," +
             csv_number(c.se_n2_gamma_gap) + "," + mt + "," + st + "," +
             std::to_string(c.degenerate) + "," + std::to_string(c.effective) + "," +
             (c.valid ? "1" : "0") + "\n";
    }
    s += "# slopes\n";
    s += "prior,slope,ci_halfwidth\n";
    for (const MomentSlope& sl : report.slopes) {
        s += sl.prior + "," + (sl.valid ? fmt17(sl.slope) : std::string()) + "," +
             (sl.valid && sl.ci_halfwidth > 0 ? fmt17(sl.ci_halfwidth) : std::string()) + "\n";
    }
    return s;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open \"" + path + "\" for writing");
    out << text;
    if (!out) throw Error("write failed for \"" + path + "\"");
}

}  // namespace

void write_report(const CoverageReport& report, const std::string& path,
                  const std::string& format) {
    if (format == "json")
        write_text(path, report_to_json(report));
    else if (format == "csv")
        write_text(path, report_to_csv(report));
    else
        throw ConfigError("unknown report format \"" + format + "\"");
}

void write_report(const MomentReport& report, const std::string& path,
                  const std::string& format) {
    if (format == "json")
        write_text(path, report_to_json(report));
    else if (format == "csv")
        write_text(path, report_to_csv(report));
    else
        throw ConfigError("unknown report format \"" + format + "\"");
}

}  // namespace truncgeo
