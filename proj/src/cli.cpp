#include "truncgeo/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "truncgeo/errors.hpp"
#include "truncgeo/experiments.hpp"
#include "truncgeo/expr.hpp"
#include "truncgeo/geometry.hpp"
#include "truncgeo/matching.hpp"
#include "truncgeo/mle.hpp"
#include "truncgeo/model.hpp"
#include "truncgeo/posterior.hpp"
#include "truncgeo/prior.hpp"
#include "truncgeo/version.hpp"

namespace truncgeo {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------- utilities

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::stringstream ss(s);
    while (std::getline(ss, part, sep)) parts.push_back(part);
    return parts;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("malformed number \"" + s + "\" in " + what);
    }
}

// Coordinate name -> axis index: theta/theta_1..theta_d are 0..d-1, gamma is d.
int coord_index(const std::string& name, int d) {
    if (name == "gamma") return d;
    if (name == "theta") return 0;
    if (name.rfind("theta_", 0) == 0) {
        const std::string suffix = name.substr(6);
        if (!suffix.empty() && suffix.find_first_not_of("0123456789") == std::string::npos) {
            const int k = std::stoi(suffix);
            if (k >= 1 && k <= d) return k - 1;
        }
    }
    throw ConfigError("unknown coordinate \"" + name + "\" (model dimension " + std::to_string(d) +
                      ")");
}

ParamPoint parse_point(const std::string& text, int d) {
    std::vector<double> coords(static_cast<size_t>(d) + 1);
    std::vector<bool> seen(static_cast<size_t>(d) + 1, false);
    for (const std::string& item : split(text, ',')) {
        const size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected name=value in point \"" + text + "\"");
        const int idx = coord_index(item.substr(0, eq), d);
        coords[static_cast<size_t>(idx)] = parse_double(item.substr(eq + 1), "point");
        seen[static_cast<size_t>(idx)] = true;
    }
    for (size_t k = 0; k < seen.size(); ++k)
        if (!seen[k])
            throw ConfigError("point \"" + text + "\" is missing " +
                              (k == static_cast<size_t>(d) ? std::string("gamma")
                                                           : "theta_" + std::to_string(k + 1)));
    Eigen::VectorXd th(d);
    for (int i = 0; i < d; ++i) th[i] = coords[static_cast<size_t>(i)];
    return ParamPoint{th, coords[static_cast<size_t>(d)]};
}

// Grid spec "theta=0.5:5:10,gamma=-1:1:5": per-axis linear spacing, inclusive
// endpoints; a bare value is a one-point axis.
std::vector<std::vector<double>> parse_grid(const std::string& text, int d) {
    std::vector<std::vector<double>> axes(static_cast<size_t>(d) + 1);
    for (const std::string& item : split(text, ',')) {
        const size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected name=spec in grid \"" + text + "\"");
        const int idx = coord_index(item.substr(0, eq), d);
        const std::string spec = item.substr(eq + 1);
        const std::vector<std::string> parts = split(spec, ':');
        std::vector<double>& axis = axes[static_cast<size_t>(idx)];
        if (parts.size() == 1) {
            axis = {parse_double(parts[0], "grid")};
        } else if (parts.size() == 3) {
            const double lo = parse_double(parts[0], "grid");
            const double hi = parse_double(parts[1], "grid");
            const int count = static_cast<int>(parse_double(parts[2], "grid"));
            if (count < 1) throw ConfigError("grid axis count must be at least 1");
            if (count == 1) {
                axis = {lo};
            } else {
                axis.resize(static_cast<size_t>(count));
                for (int k = 0; k < count; ++k)
                    axis[static_cast<size_t>(k)] = lo + (hi - lo) * k / (count - 1);
            }
        } else {
            throw ConfigError("grid axis \"" + item + "\" must be value or lo:hi:count");
        }
    }
    for (size_t k = 0; k < axes.size(); ++k)
        if (axes[k].empty())
            throw ConfigError("grid is missing " + (k == static_cast<size_t>(d)
                                                        ? std::string("gamma")
                                                        : "theta_" + std::to_string(k + 1)));
    return axes;
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& what) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown key \"" + it.key() + "\" in " + what);
    }
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file \"" + path + "\"");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file \"" + path + "\": " + e.what());
    }
}

Interval interval_from_json(const json& pair, const std::string& what) {
    if (!pair.is_array() || pair.size() != 2)
        throw ConfigError(what + " must be a [lo, hi] pair (null for unbounded)");
    Interval iv;
    if (!pair[0].is_null()) iv.lo = pair[0].get<double>();
    if (!pair[1].is_null()) iv.hi = pair[1].get<double>();
    if (!(iv.lo < iv.hi)) throw ConfigError(what + " must have lo < hi");
    return iv;
}

// Custom exponential-type family from a config "model" object.
ModelSpec model_from_json(const json& jm) {
    reject_unknown_keys(
        jm, {"name", "d", "F", "M", "theta_domain", "trunc_interval", "psi", "tail_scale"},
        "model definition");
    OtefConfig cfg;
    cfg.name = jm.value("name", std::string("custom_otef"));
    if (!jm.contains("F") || !jm["F"].is_array() || jm["F"].empty())
        throw ConfigError("model definition needs a non-empty F array of expressions in x");
    cfg.d = static_cast<int>(jm["F"].size());
    if (jm.contains("d") && jm["d"].get<int>() != cfg.d)
        throw ConfigError("model d does not match the number of F expressions");
    for (const auto& fx : jm["F"]) {
        CompiledExpr e = parse_expr(fx.get<std::string>());
        if (e.uses_params())
            throw ConfigError("F expressions may reference x only: \"" + e.source() + "\"");
        cfg.F.push_back([e](double x) { return e.eval_x(x); });
    }
    if (jm.contains("M")) {
        CompiledExpr e = parse_expr(jm["M"].get<std::string>());
        if (e.uses_params())
            throw ConfigError("M may reference x only: \"" + e.source() + "\"");
        cfg.M = [e](double x) { return e.eval_x(x); };
    }
    if (jm.contains("theta_domain")) {
        const json& dom = jm["theta_domain"];
        if (!dom.is_array() || static_cast<int>(dom.size()) != cfg.d)
            throw ConfigError("theta_domain must list one [lo, hi] pair per theta component");
        for (const auto& pair : dom)
            cfg.theta_domain.push_back(interval_from_json(pair, "theta_domain entry"));
    }
    if (jm.contains("trunc_interval"))
        cfg.trunc_interval = interval_from_json(jm["trunc_interval"], "trunc_interval");
    if (jm.contains("psi")) {
        CompiledExpr e = parse_expr(jm["psi"].get<std::string>());
        if (e.uses_x()) throw ConfigError("psi may not reference x");
        cfg.psi_closed = [e](const ParamPoint& p) { return e.eval(p); };
    }
    if (jm.contains("tail_scale")) cfg.tail_scale = jm["tail_scale"].get<double>();
    return make_otef(std::move(cfg));
}

// The model comes from --model (registry name) or a config file's "model"
// key, which may itself be a registry name or a custom definition.
ModelSpec resolve_model(const std::string& model_flag, const json* config) {
    if (config && config->contains("model")) {
        const json& jm = (*config)["model"];
        if (jm.is_object()) {
            ModelSpec m = model_from_json(jm);
            if (!model_flag.empty() && model_flag != m.name)
                throw ConfigError("--model \"" + model_flag +
                                  "\" conflicts with the config-defined model \"" + m.name + "\"");
            return m;
        }
        if (jm.is_string()) {
            const std::string name = jm.get<std::string>();
            if (!model_flag.empty() && model_flag != name)
                throw ConfigError("--model conflicts with the config file's model name");
            return make_model(name);
        }
        throw ConfigError("config \"model\" must be a name or a definition object");
    }
    if (model_flag.empty()) throw ConfigError("no model given (use --model or a config file)");
    return make_model(model_flag);
}

Sample read_data_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file \"" + path + "\"");
    std::vector<double> values;
    double v;
    while (in >> v) values.push_back(v);
    if (!in.eof()) throw ConfigError("non-numeric content in data file \"" + path + "\"");
    if (values.empty()) throw ConfigError("data file \"" + path + "\" is empty");
    return make_sample(std::move(values));
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open \"" + path + "\" for writing");
    out << text;
    if (!out) throw Error("write failed for \"" + path + "\"");
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        write_text_file(out_path, text);
}

json tool_block() { return json{{"name", "truncgeo"}, {"version", kVersion}}; }

std::string csv_metadata(const json& config) {
    std::string s = "# tool: truncgeo ";
    s += kVersion;
    s += "\n# config: ";
    s += config.dump();
    s += "\n";
    return s;
}

json vector_to_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json mle_to_json(const MleResult& r) {
    return json{{"theta_hat", vector_to_json(r.theta_hat)},
                {"gamma_hat", r.gamma_hat},
                {"c_hat", r.c_hat},
                {"g_theta_hat", matrix_to_json(r.g_theta_hat)},
                {"gamma_star", r.gamma_star},
                {"n", r.n},
                {"converged", r.converged},
                {"iterations", r.iterations},
                {"degenerate", r.degenerate}};
}

PivotKind parse_pivot(const std::string& text, int* component) {
    if (text == "T") return PivotKind::T;
    if (!text.empty() && text[0] == 'U') {
        *component = text.size() == 1 ? 0 : static_cast<int>(parse_double(text.substr(1), "pivot")) - 1;
        return PivotKind::U;
    }
    throw ConfigError("pivot must be T or U<i>");
}

// ------------------------------------------------------------- subcommands

struct CommonModelOpts {
    std::string model;
    std::string config_path;
    std::string out_path;

    ModelSpec resolve(json* config_out = nullptr) const {
        json config;
        const json* cfg = nullptr;
        if (!config_path.empty()) {
            config = load_json_file(config_path);
            reject_unknown_keys(config, {"model"}, "config file");
            cfg = &config;
        }
        ModelSpec m = resolve_model(model, cfg);
        if (config_out && cfg) *config_out = config;
        return m;
    }
};

struct SampleOpts {
    std::string data_path;
    std::size_t draw_n = 0;
    std::string true_point;
    std::uint64_t seed = 1;

    Sample obtain(const ModelSpec& m) const {
        if (!data_path.empty()) {
            if (draw_n > 0) throw ConfigError("give either --data or --draw, not both");
            return read_data_file(data_path);
        }
        if (draw_n == 0) throw ConfigError("no data: give --data FILE or --draw N with --true");
        if (true_point.empty()) throw ConfigError("--draw needs --true theta=..,gamma=..");
        return draw_sample(m, parse_point(true_point, m.d), draw_n, seed);
    }

    json describe() const {
        json j;
        if (!data_path.empty()) {
            j["data"] = data_path;
        } else {
            j["draw"] = draw_n;
            j["true"] = true_point;
            j["seed"] = seed;
        }
        return j;
    }
};

int cmd_geometry(const CommonModelOpts& common, const std::string& point_text,
                 const std::string& alphas_text) {
    const ModelSpec m = common.resolve();
    const ParamPoint p = parse_point(point_text, m.d);
    const GeometryAt geo = geometry_at(m, p);

    json j;
    j["tool"] = tool_block();
    j["config"] = {{"model", m.name}, {"point", point_text}, {"alphas", alphas_text}};
    j["model"] = m.name;
    j["point"] = {{"theta", vector_to_json(p.theta)}, {"gamma", p.gamma}};
    j["g_theta"] = matrix_to_json(geo.g_theta);
    j["g_theta_inv"] = matrix_to_json(geo.g_theta_inv);
    j["g_gammagamma"] = geo.g_gammagamma;
    j["c"] = geo.c;
    j["a11"] = vector_to_json(geo.a11);
    j["a21"] = geo.a21.data;
    j["a30"] = geo.a30.data;
    j["a02"] = geo.a02;
    j["christoffel_g"] = {{"dim", m.d + 1},
                          {"order", "index (a,b,c) row-major; gamma is the last coordinate"},
                          {"data", geo.christoffel_g}};
    json alpha_block = json::object();
    for (const std::string& a : split(alphas_text, ',')) {
        const double alpha = parse_double(a, "--alphas");
        alpha_block[a] = geo.alpha_christoffel(alpha).data;
    }
    j["alpha_christoffel"] = std::move(alpha_block);
    emit(common.out_path, j.dump(2) + "\n");
    return 0;
}

int cmd_residual(const CommonModelOpts& common, const std::string& prior_text,
                 const std::string& cond_text, int component_1based, const std::string& form,
                 const std::string& grid_text) {
    const ModelSpec m = common.resolve();
    const PriorSpec prior = make_prior(prior_text);
    const MatchKind kind = match_kind_from_name(cond_text);
    const bool lie = form == "lie";
    if (!lie && form != "pde") throw ConfigError("--form must be pde or lie");
    const int component = component_1based - 1;
    if (component < 0 || component >= m.d)
        throw ConfigError("--component out of range for dimension " + std::to_string(m.d));
    const std::vector<std::vector<double>> axes = parse_grid(grid_text, m.d);

    json config{{"model", m.name}, {"prior", prior_text},   {"cond", cond_text},
                {"component", component_1based}, {"form", form}, {"grid", grid_text}};
    std::string csv = csv_metadata(config);
    for (int i = 0; i < m.d; ++i) csv += "theta_" + std::to_string(i + 1) + ",";
    csv += "gamma,residual\n";

    // row-major over axes, gamma fastest
    std::vector<size_t> idx(axes.size(), 0);
    char buf[64];
    for (;;) {
        Eigen::VectorXd th(m.d);
        for (int i = 0; i < m.d; ++i) th[i] = axes[static_cast<size_t>(i)][idx[static_cast<size_t>(i)]];
        const ParamPoint p{th, axes.back()[idx.back()]};
        const double r = lie ? lie_residual(m, p, prior, kind)
                             : matching_residual(m, p, prior, kind, component);
        for (size_t a = 0; a < axes.size(); ++a) {
            std::snprintf(buf, sizeof buf, "%.17g", axes[a][idx[a]]);
            csv += buf;
            csv += ',';
        }
        std::snprintf(buf, sizeof buf, "%.17g", r);
        csv += buf;
        csv += '\n';
        int a = static_cast<int>(axes.size()) - 1;
        for (; a >= 0; --a) {
            if (++idx[static_cast<size_t>(a)] < axes[static_cast<size_t>(a)].size()) break;
            idx[static_cast<size_t>(a)] = 0;
        }
        if (a < 0) break;
    }
    emit(common.out_path, csv);
    return 0;
}

int cmd_streamline(const CommonModelOpts& common, const std::string& start_text, double smax,
                   double step) {
    const ModelSpec m = common.resolve();
    if (!(step > 0)) throw ConfigError("--step must be positive");
    const ParamPoint start = parse_point(start_text, m.d);
    const Streamline line = trace_streamline(m, start, smax, step);
    json config{{"model", m.name}, {"start", start_text}, {"smax", smax}, {"step", step}};
    emit(common.out_path, csv_metadata(config) + streamline_csv(line, m.d));
    return 0;
}

int cmd_mle(const CommonModelOpts& common, const SampleOpts& sample_opts) {
    const ModelSpec m = common.resolve();
    const Sample sample = sample_opts.obtain(m);
    const MleResult r = fit_mle(m, sample);
    json j;
    j["tool"] = tool_block();
    json config = sample_opts.describe();
    config["model"] = m.name;
    j["config"] = std::move(config);
    j["mle"] = mle_to_json(r);
    emit(common.out_path, j.dump(2) + "\n");
    return 0;
}

int cmd_posterior(const CommonModelOpts& common, const SampleOpts& sample_opts,
                  const std::string& prior_text, const std::string& pivot_text,
                  const std::string& z_text, const std::string& dump_grid_path) {
    const ModelSpec m = common.resolve();
    const Sample sample = sample_opts.obtain(m);
    const PriorSpec prior = make_prior(prior_text);
    const PosteriorGrid post = posterior_grid(m, sample, prior);
    const auto [theta_bar, gamma_bar] = posterior_means(post);

    json j;
    j["tool"] = tool_block();
    json config = sample_opts.describe();
    config["model"] = m.name;
    config["prior"] = prior_text;
    config["pivot"] = pivot_text;
    j["config"] = std::move(config);
    j["mle"] = mle_to_json(post.mle);
    j["log_z"] = post.log_z;
    j["means"] = {{"theta", vector_to_json(theta_bar)}, {"gamma", gamma_bar}};
    if (!z_text.empty()) {
        int component = 0;
        const PivotKind kind = parse_pivot(pivot_text, &component);
        json cdfs = json::array();
        for (const std::string& zs : split(z_text, ',')) {
            const double z = parse_double(zs, "--z");
            const CdfValue cv = pivot_cdf(post, kind, z, component);
            cdfs.push_back({{"z", z}, {"p", cv.p}, {"clamped", cv.clamped}});
        }
        j["pivot_cdf"] = std::move(cdfs);
    }
    if (!dump_grid_path.empty()) write_text_file(dump_grid_path, posterior_to_json(post));
    emit(common.out_path, j.dump(2) + "\n");
    return 0;
}

// Shared config resolution for the two experiment subcommands.
struct ExperimentCli {
    std::string config_path;
    std::string model;
    std::string true_point;
    std::string priors;  // ';'-separated
    std::string n_values;
    std::size_t replications = 0;
    std::string levels;
    std::string pivot;
    std::uint64_t master_seed = 0;
    bool seed_given = false;
    int workers = 0;
    std::string out_json;
    std::string out_csv;

    ExperimentConfig resolve(bool coverage) const {
        ExperimentConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot open config file \"" + config_path + "\"");
            std::stringstream buffer;
            buffer << in.rdbuf();
            cfg = experiment_config_from_json(buffer.str());
        }
        if (!model.empty()) cfg.model = model;
        const ModelSpec m = make_model(cfg.model);  // validates the name early
        if (!true_point.empty()) cfg.true_point = parse_point(true_point, m.d);
        if (cfg.true_point.theta.size() == 0)
            throw ConfigError("no true parameter point configured");
        if (!priors.empty()) cfg.priors = split(priors, ';');
        if (!n_values.empty()) {
            cfg.n_values.clear();
            for (const std::string& s : split(n_values, ','))
                cfg.n_values.push_back(static_cast<std::size_t>(parse_double(s, "--n")));
        }
        if (replications > 0) cfg.replications = replications;
        if (!levels.empty()) {
            cfg.levels.clear();
            for (const std::string& s : split(levels, ','))
                cfg.levels.push_back(parse_double(s, "--levels"));
        }
        if (!pivot.empty()) cfg.pivot = parse_pivot(pivot, &cfg.pivot_component);
        if (seed_given) cfg.master_seed = master_seed;
        if (workers > 0) cfg.worker_count = workers;
        if (const char* env = std::getenv("TRUNCGEO_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end == env || *end != '\0' || v < 1)
                throw ConfigError("TRUNCGEO_THREADS must be a positive integer");
            cfg.worker_count = static_cast<int>(v);
        }
        if (coverage && cfg.levels.empty()) cfg.levels = {0.9};
        return cfg;
    }

    template <typename Report>
    int emit_report(const Report& report) const {
        if (!out_json.empty()) write_report(report, out_json, "json");
        if (!out_csv.empty()) write_report(report, out_csv, "csv");
        if (out_json.empty() && out_csv.empty()) std::cout << report_to_json(report);
        return 0;
    }
};

// --------------------------------------------------------------- dispatcher

void add_common(CLI::App* sub, CommonModelOpts& common) {
    sub->add_option("--model", common.model, "registry model name");
    sub->add_option("--config", common.config_path, "JSON config file (may define a custom model)");
    sub->add_option("--out", common.out_path, "output file (default stdout)");
}

void add_sample(CLI::App* sub, SampleOpts& opts) {
    sub->add_option("--data", opts.data_path, "whitespace-separated data file");
    sub->add_option("--draw", opts.draw_n, "draw a synthetic sample of this size");
    sub->add_option("--true", opts.true_point, "true point for --draw, e.g. theta=2,gamma=0");
    sub->add_option("--seed", opts.seed, "sampling seed for --draw");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"information geometry and matching-prior toolkit for one-sided truncated families"};
    app.name("truncgeo");
    app.require_subcommand(1);

    // geometry
    CommonModelOpts geo_common;
    std::string geo_point, geo_alphas = "0,1";
    CLI::App* geo = app.add_subcommand("geometry", "dump geometric quantities at a point as JSON");
    add_common(geo, geo_common);
    geo->add_option("--point", geo_point, "evaluation point, e.g. theta=2,gamma=0")->required();
    geo->add_option("--alphas", geo_alphas, "comma list of alpha values for the alpha-connection");

    // residual
    CommonModelOpts res_common;
    std::string res_prior, res_cond, res_form = "pde", res_grid;
    int res_component = 1;
    CLI::App* res = app.add_subcommand("residual", "evaluate a matching condition over a grid (CSV)");
    add_common(res, res_common);
    res->add_option("--prior", res_prior, "prior: flat | jeffreys | alpha_parallel:<a> | "
                                          "extended_volume:<rho>,<tau> | pi expression")
        ->required();
    res->add_option("--cond", res_cond, "pm_gamma | pm_theta | mm_gamma | mm_theta")->required();
    res->add_option("--component", res_component, "theta component i (1-based) for the theta conditions");
    res->add_option("--form", res_form, "pde (default) or lie");
    res->add_option("--grid", res_grid, "e.g. theta=0.5:5:10,gamma=-1:1:5")->required();

    // streamline
    CommonModelOpts str_common;
    std::string str_start;
    double str_smax = 0, str_step = 1e-3;
    CLI::App* str = app.add_subcommand("streamline", "trace the matching vector field (CSV)");
    add_common(str, str_common);
    str->add_option("--start", str_start, "starting point, e.g. theta=1,gamma=0")->required();
    str->add_option("--smax", str_smax, "arc-parameter endpoint")->required();
    str->add_option("--step", str_step, "RK4 step (default 1e-3)");

    // mle
    CommonModelOpts mle_common;
    SampleOpts mle_sample;
    CLI::App* mle = app.add_subcommand("mle", "fit the MLE on a sample (JSON)");
    add_common(mle, mle_common);
    add_sample(mle, mle_sample);

    // posterior
    CommonModelOpts post_common;
    SampleOpts post_sample;
    std::string post_prior, post_pivot = "T", post_z, post_dump;
    CLI::App* post = app.add_subcommand("posterior", "exact grid posterior: means and pivot CDFs (JSON)");
    add_common(post, post_common);
    add_sample(post, post_sample);
    post->add_option("--prior", post_prior, "prior specification")->required();
    post->add_option("--pivot", post_pivot, "T (default) or U<i>");
    post->add_option("--z", post_z, "comma list of pivot CDF evaluation points");
    post->add_option("--dump-grid", post_dump, "also write the full grid as JSON to this file");

    // coverage / moment
    ExperimentCli cov, mom;
    CLI::App* cov_app = app.add_subcommand("coverage", "Monte Carlo one-sided coverage experiment");
    CLI::App* mom_app = app.add_subcommand("moment", "Monte Carlo posterior-mean matching experiment");
    for (auto [sub, opts] : {std::pair{cov_app, &cov}, std::pair{mom_app, &mom}}) {
        sub->add_option("--config", opts->config_path, "experiment JSON config file");
        sub->add_option("--model", opts->model, "registry model name");
        sub->add_option("--true", opts->true_point, "true point, e.g. theta=2,gamma=0");
        sub->add_option("--priors", opts->priors, "';'-separated prior specifications");
        sub->add_option("--n", opts->n_values, "comma list of sample sizes");
        sub->add_option("--reps", opts->replications, "replications per cell (>= 100)");
        sub->add_option("--pivot", opts->pivot, "T or U<i>");
        sub->add_option("--seed", opts->master_seed, "master seed")
            ->each([opts](const std::string&) { opts->seed_given = true; });
        sub->add_option("--workers", opts->workers, "worker threads");
        sub->add_option("--out-json", opts->out_json, "write JSON report here");
        sub->add_option("--out-csv", opts->out_csv, "write CSV report here");
    }
    cov_app->add_option("--levels", cov.levels, "comma list of nominal levels in (0,1)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (geo->parsed()) return cmd_geometry(geo_common, geo_point, geo_alphas);
        if (res->parsed())
            return cmd_residual(res_common, res_prior, res_cond, res_component, res_form, res_grid);
        if (str->parsed()) return cmd_streamline(str_common, str_start, str_smax, str_step);
        if (mle->parsed()) return cmd_mle(mle_common, mle_sample);
        if (post->parsed())
            return cmd_posterior(post_common, post_sample, post_prior, post_pivot, post_z, post_dump);
        if (cov_app->parsed()) return cov.emit_report(run_coverage(cov.resolve(true)));
        if (mom_app->parsed()) return mom.emit_report(run_moment(mom.resolve(false)));
        std::cerr << app.help();
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        // malformed values inside user-supplied configuration files
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace truncgeo
