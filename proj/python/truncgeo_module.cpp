// Python bindings for the main library operations. Vectors cross the
// boundary as plain lists so the module has no numpy requirement.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "truncgeo/errors.hpp"
#include "truncgeo/experiments.hpp"
#include "truncgeo/geometry.hpp"
#include "truncgeo/matching.hpp"
#include "truncgeo/mle.hpp"
#include "truncgeo/model.hpp"
#include "truncgeo/posterior.hpp"
#include "truncgeo/prior.hpp"
#include "truncgeo/version.hpp"

namespace py = pybind11;
using namespace truncgeo;

namespace {

ParamPoint point_of(const std::vector<double>& theta, double gamma) {
    return ParamPoint{
        Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size())),
        gamma};
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> rows(static_cast<size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows[static_cast<size_t>(i)].assign(m.row(i).begin(), m.row(i).end());
    }
    return rows;
}

PivotKind pivot_of(const std::string& text) {
    if (text == "T") return PivotKind::T;
    if (text == "U") return PivotKind::U;
    throw ConfigError("pivot must be \"T\" or \"U\"");
}

py::dict mle_dict(const MleResult& r) {
    py::dict d;
    d["theta_hat"] = to_vector(r.theta_hat);
    d["gamma_hat"] = r.gamma_hat;
    d["c_hat"] = r.c_hat;
    d["g_theta_hat"] = to_rows(r.g_theta_hat);
    d["gamma_star"] = r.gamma_star;
    d["n"] = r.n;
    d["converged"] = r.converged;
    d["degenerate"] = r.degenerate;
    return d;
}

}  // namespace

PYBIND11_MODULE(_truncgeo, m) {
    m.doc() = "information geometry and matching priors for one-sided truncated families";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("model_names", &model_names, "registered family names");

    m.def(
        "log_density",
        [](const std::string& model, const std::vector<double>& theta, double gamma, double x) {
            const ModelSpec ms = make_model(model);
            return log_density(ms, x, point_of(theta, gamma));
        },
        py::arg("model"), py::arg("theta"), py::arg("gamma"), py::arg("x"));

    m.def(
        "geometry",
        [](const std::string& model, const std::vector<double>& theta, double gamma) {
            const ModelSpec ms = make_model(model);
            const GeometryAt g = geometry_at(ms, point_of(theta, gamma));
            py::dict d;
            d["g_theta"] = to_rows(g.g_theta);
            d["g_theta_inv"] = to_rows(g.g_theta_inv);
            d["g_gammagamma"] = g.g_gammagamma;
            d["c"] = g.c;
            d["a11"] = to_vector(g.a11);
            d["a21"] = g.a21.data;
            d["a30"] = g.a30.data;
            d["a02"] = g.a02;
            d["christoffel_g"] = g.christoffel_g;
            return d;
        },
        py::arg("model"), py::arg("theta"), py::arg("gamma"),
        "metric blocks, truncation-boundary coefficients, and connection at a point");

    m.def(
        "extended_volume",
        [](const std::string& model, const std::vector<double>& theta, double gamma, double rho,
           double tau) {
            const ModelSpec ms = make_model(model);
            return extended_volume(ms, point_of(theta, gamma), rho, tau);
        },
        py::arg("model"), py::arg("theta"), py::arg("gamma"), py::arg("rho"), py::arg("tau"));

    m.def(
        "matching_residual",
        [](const std::string& model, const std::string& prior, const std::string& cond,
           const std::vector<double>& theta, double gamma, int component) {
            const ModelSpec ms = make_model(model);
            return matching_residual(ms, point_of(theta, gamma), make_prior(prior),
                                     match_kind_from_name(cond), component);
        },
        py::arg("model"), py::arg("prior"), py::arg("cond"), py::arg("theta"), py::arg("gamma"),
        py::arg("component") = 0,
        "left-minus-right value of a probability/moment matching condition");

    m.def(
        "lie_residual",
        [](const std::string& model, const std::string& prior, const std::string& cond,
           const std::vector<double>& theta, double gamma) {
            const ModelSpec ms = make_model(model);
            return lie_residual(ms, point_of(theta, gamma), make_prior(prior),
                                match_kind_from_name(cond));
        },
        py::arg("model"), py::arg("prior"), py::arg("cond"), py::arg("theta"), py::arg("gamma"),
        "flow-derivative form of the gamma matching conditions (exponential families)");

    m.def(
        "draw_sample",
        [](const std::string& model, const std::vector<double>& theta, double gamma, std::size_t n,
           std::uint64_t seed) {
            const ModelSpec ms = make_model(model);
            return draw_sample(ms, point_of(theta, gamma), n, seed).values;
        },
        py::arg("model"), py::arg("theta"), py::arg("gamma"), py::arg("n"), py::arg("seed"));

    m.def(
        "fit_mle",
        [](const std::string& model, const std::vector<double>& values) {
            const ModelSpec ms = make_model(model);
            return mle_dict(fit_mle(ms, make_sample(values)));
        },
        py::arg("model"), py::arg("values"));

    m.def(
        "posterior_summary",
        [](const std::string& model, const std::string& prior, const std::vector<double>& values,
           const std::string& pivot, int component, const std::vector<double>& z) {
            const ModelSpec ms = make_model(model);
            const PosteriorGrid post = posterior_grid(ms, make_sample(values), make_prior(prior));
            const auto [theta_bar, gamma_bar] = posterior_means(post);
            py::dict d;
            d["mle"] = mle_dict(post.mle);
            d["log_z"] = post.log_z;
            d["theta_mean"] = to_vector(theta_bar);
            d["gamma_mean"] = gamma_bar;
            const PivotKind kind = pivot_of(pivot);
            py::list cdfs;
            for (double zi : z) {
                const CdfValue cv = pivot_cdf(post, kind, zi, component);
                py::dict e;
                e["z"] = zi;
                e["p"] = cv.p;
                e["clamped"] = cv.clamped;
                cdfs.append(e);
            }
            d["pivot_cdf"] = cdfs;
            return d;
        },
        py::arg("model"), py::arg("prior"), py::arg("values"), py::arg("pivot") = "T",
        py::arg("component") = 0, py::arg("z") = std::vector<double>{},
        "exact-quadrature posterior: means and pivot CDF values");

    m.def(
        "run_experiment",
        [](const std::string& kind, const std::string& config_json) {
            const ExperimentConfig cfg = experiment_config_from_json(config_json);
            if (kind == "coverage") return report_to_json(run_coverage(cfg));
            if (kind == "moment") return report_to_json(run_moment(cfg));
            throw ConfigError("kind must be \"coverage\" or \"moment\"");
        },
        py::arg("kind"), py::arg("config_json"),
        "run a Monte Carlo matching experiment; returns the JSON report");
}
