// End-to-end command-line checks: exit codes, emitted JSON/CSV content, and
// custom model definitions, driven through run_cli in-process.
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "truncgeo/cli.hpp"
#include "truncgeo/geometry.hpp"
#include "truncgeo/model.hpp"

using namespace truncgeo;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& p) : path(p) {}
    ~TempFile() { std::remove(path.c_str()); }
};

// data rows of a CSV emission, with '#' metadata and the column header removed
std::vector<std::string> csv_rows(const std::string& text) {
    std::vector<std::string> rows;
    std::istringstream in(text);
    std::string line;
    bool past_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!past_header) {
            past_header = true;  // column header
            continue;
        }
        rows.push_back(line);
    }
    return rows;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string field;
    while (std::getline(in, field, ',')) out.push_back(field);
    return out;
}

}  // namespace

TEST_CASE("exit codes separate usage, configuration, and success") {
    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({}) == 2);                       // a subcommand is required
    CHECK(run_cli({"frobnicate"}) == 2);           // unknown subcommand
    CHECK(run_cli({"geometry"}) == 2);             // missing required --point
    CHECK(run_cli({"geometry", "--model", "no_such_model", "--point", "theta=1,gamma=0"}) == 2);
    CHECK(run_cli({"mle", "--model", "trunc_exp", "--data", "/nonexistent/file.txt"}) == 2);
    CHECK(run_cli({"geometry", "--model", "trunc_exp", "--point", "bogus"}) == 2);
}

TEST_CASE("geometry output reproduces the library values") {
    TempFile tmp("/tmp/truncgeo_cli_geo.json");
    REQUIRE(run_cli({"geometry", "--model", "trunc_exp", "--point", "theta=2,gamma=0.5",
                     "--alphas", "0,1", "--out", tmp.path}) == 0);
    const json j = json::parse(slurp(tmp.path));

    CHECK(j.at("tool").at("name") == "truncgeo");
    CHECK(j.at("model") == "trunc_exp");
    CHECK(j.at("point").at("theta").at(0) == 2.0);
    CHECK(j.at("point").at("gamma") == 0.5);

    CHECK(j.at("g_theta").at(0).at(0).get<double>() == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(j.at("g_theta_inv").at(0).at(0).get<double>() == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(j.at("g_gammagamma").get<double>() == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(j.at("c").get<double>() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(j.at("a11").at(0).get<double>() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(j.at("a30").at(0).get<double>() == doctest::Approx(0.25).epsilon(1e-8));

    // alpha-connection entries match direct evaluation: -(1-alpha)/theta^3
    CHECK(j.at("alpha_christoffel").at("0").at(0).get<double>() ==
          doctest::Approx(-1.0 / 8.0).epsilon(1e-6));
    CHECK(j.at("alpha_christoffel").at("1").at(0).get<double>() ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-6));

    // and the full structure agrees with the API
    const ModelSpec m = make_model("trunc_exp");
    Eigen::VectorXd th(1);
    th[0] = 2.0;
    const GeometryAt geo = geometry_at(m, ParamPoint{th, 0.5});
    CHECK(j.at("g_theta").at(0).at(0).get<double>() ==
          doctest::Approx(geo.g_theta(0, 0)).epsilon(1e-12));
    CHECK(j.at("a02").get<double>() == doctest::Approx(geo.a02).scale(1.0).epsilon(1e-12));
}

TEST_CASE("residual grids vanish for a known solution and expose the flow form") {
    TempFile tmp("/tmp/truncgeo_cli_res.csv");
    REQUIRE(run_cli({"residual", "--model", "trunc_exp", "--prior", "1/theta", "--cond",
                     "pm_gamma", "--grid", "theta=0.5:3:4,gamma=-1:1:3", "--out", tmp.path}) == 0);
    const std::string text = slurp(tmp.path);
    CHECK(text.rfind("# tool: truncgeo ", 0) == 0);
    CHECK(text.find("theta_1,gamma,residual\n") != std::string::npos);

    const std::vector<std::string> rows = csv_rows(text);
    REQUIRE(rows.size() == 12);  // 4 theta values x 3 gamma values
    for (const std::string& row : rows) {
        const auto fields = split_csv(row);
        REQUIRE(fields.size() == 3);
        CHECK_MESSAGE(std::fabs(std::stod(fields[2])) < 1e-6, row);
    }
    // gamma varies fastest: first two rows share theta_1 = 0.5
    CHECK(std::stod(split_csv(rows[0])[0]) == 0.5);
    CHECK(std::stod(split_csv(rows[1])[0]) == 0.5);
    CHECK(std::stod(split_csv(rows[0])[1]) == -1.0);
    CHECK(std::stod(split_csv(rows[1])[1]) == 0.0);

    // the flow form of the same condition agrees on the same grid
    TempFile tmp2("/tmp/truncgeo_cli_res_lie.csv");
    REQUIRE(run_cli({"residual", "--model", "trunc_exp", "--prior", "1/theta", "--cond",
                     "pm_gamma", "--form", "lie", "--grid", "theta=0.5:3:4,gamma=-1:1:3",
                     "--out", tmp2.path}) == 0);
    for (const std::string& row : csv_rows(slurp(tmp2.path))) {
        CHECK(std::fabs(std::stod(split_csv(row)[2])) < 1e-6);
    }

    // the flow form rejects theta conditions
    CHECK(run_cli({"residual", "--model", "trunc_exp", "--prior", "flat", "--cond", "pm_theta",
                   "--form", "lie", "--grid", "theta=1:2:2,gamma=0:1:2", "--out",
                   "/tmp/truncgeo_cli_res_bad.csv"}) == 2);
}

TEST_CASE("streamlines integrate the matching flow to closed form") {
    TempFile tmp("/tmp/truncgeo_cli_stream.csv");
    REQUIRE(run_cli({"streamline", "--model", "trunc_exp", "--start", "theta=1,gamma=0",
                     "--smax", "0.5", "--step", "0.005", "--out", tmp.path}) == 0);
    const std::string text = slurp(tmp.path);
    CHECK(text.find("s,theta_1,gamma,eta_1,status\n") != std::string::npos);

    const std::vector<std::string> rows = csv_rows(text);
    REQUIRE(rows.size() > 10);
    const auto last = split_csv(rows.back());
    REQUIRE(last.size() == 5);
    // theta(s) = theta0/(1 - theta0 s), gamma(s) = gamma0 + s, eta conserved
    CHECK(std::stod(last[0]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::stod(last[1]) == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(std::stod(last[2]) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::stod(last[3]) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(last[4] == "ok");
}

TEST_CASE("a custom model definition reproduces the built-in family") {
    TempFile cfg("/tmp/truncgeo_cli_model.json");
    spit(cfg.path, R"json({
        "model": {
            "name": "expclone",
            "F": ["-x"],
            "psi": "-theta*gamma - log(theta)",
            "theta_domain": [[0, null]]
        }
    })json");

    TempFile out_custom("/tmp/truncgeo_cli_geo_custom.json");
    TempFile out_builtin("/tmp/truncgeo_cli_geo_builtin.json");
    REQUIRE(run_cli({"geometry", "--config", cfg.path, "--point", "theta=1.5,gamma=0.25",
                     "--out", out_custom.path}) == 0);
    REQUIRE(run_cli({"geometry", "--model", "trunc_exp", "--point", "theta=1.5,gamma=0.25",
                     "--out", out_builtin.path}) == 0);

    const json a = json::parse(slurp(out_custom.path));
    const json b = json::parse(slurp(out_builtin.path));
    CHECK(a.at("model") == "expclone");
    for (const char* key : {"g_gammagamma", "c", "a02"}) {
        CHECK_MESSAGE(a.at(key).get<double>() ==
                          doctest::Approx(b.at(key).get<double>()).epsilon(1e-7).scale(1.0),
                      key);
    }
    CHECK(a.at("g_theta").at(0).at(0).get<double>() ==
          doctest::Approx(b.at("g_theta").at(0).at(0).get<double>()).epsilon(1e-7));

    // conflicting --model and config model is a configuration error
    CHECK(run_cli({"geometry", "--config", cfg.path, "--model", "trunc_exp", "--point",
                   "theta=1,gamma=0", "--out", "/tmp/truncgeo_cli_conflict.json"}) == 2);

    // malformed custom models are rejected
    TempFile bad("/tmp/truncgeo_cli_model_bad.json");
    spit(bad.path, R"json({"model": {"F": ["-x"], "psi": "x*theta"}})json");
    CHECK(run_cli({"geometry", "--config", bad.path, "--point", "theta=1,gamma=0", "--out",
                   "/tmp/truncgeo_cli_geo_bad.json"}) == 2);
}

TEST_CASE("fit and posterior commands agree with the conjugate closed forms") {
    TempFile data("/tmp/truncgeo_cli_data.txt");
    spit(data.path, "0.5 0.9\n1.2 0.6\n");

    TempFile fit_out("/tmp/truncgeo_cli_mle.json");
    REQUIRE(run_cli({"mle", "--model", "trunc_exp", "--data", data.path, "--out",
                     fit_out.path}) == 0);
    const json fit = json::parse(slurp(fit_out.path)).at("mle");
    CHECK(fit.at("n") == 4);
    CHECK(fit.at("converged") == true);
    CHECK(fit.at("gamma_hat").get<double>() == 0.5);
    CHECK(fit.at("theta_hat").at(0).get<double>() == doctest::Approx(4.0 / 1.2).epsilon(1e-9));
    CHECK(fit.at("gamma_star").get<double>() == doctest::Approx(0.425).epsilon(1e-9));

    TempFile post_out("/tmp/truncgeo_cli_post.json");
    REQUIRE(run_cli({"posterior", "--model", "trunc_exp", "--data", data.path, "--prior",
                     "flat", "--z", "-1,-2", "--out", post_out.path}) == 0);
    const json post = json::parse(slurp(post_out.path));
    // flat prior: posterior theta mean equals the likelihood maximizer, and
    // P(T <= z | X) = (1 - z/n)^{-n}
    CHECK(post.at("means").at("theta").at(0).get<double>() ==
          doctest::Approx(4.0 / 1.2).epsilon(5e-4));
    CHECK(post.at("pivot_cdf").at(0).at("z").get<double>() == -1.0);
    CHECK(post.at("pivot_cdf").at(0).at("p").get<double>() ==
          doctest::Approx(std::pow(1.25, -4.0)).epsilon(5e-3));
    CHECK(post.at("pivot_cdf").at(1).at("p").get<double>() ==
          doctest::Approx(std::pow(1.5, -4.0)).epsilon(5e-3));
}

TEST_CASE("experiment commands emit deterministic reports") {
    TempFile j1("/tmp/truncgeo_cli_cov1.json");
    TempFile j2("/tmp/truncgeo_cli_cov2.json");
    const std::vector<std::string> args = {"coverage", "--model",  "trunc_exp",
                                           "--true",   "theta=2,gamma=0",
                                           "--priors", "1/theta",  "--n", "15",
                                           "--reps",   "120",      "--seed", "5"};
    auto with_out = [&](const std::string& path, int workers) {
        std::vector<std::string> a = args;
        a.push_back("--workers");
        a.push_back(std::to_string(workers));
        a.push_back("--out-json");
        a.push_back(path);
        return a;
    };
    REQUIRE(run_cli(with_out(j1.path, 1)) == 0);
    REQUIRE(run_cli(with_out(j2.path, 3)) == 0);
    const std::string s1 = slurp(j1.path), s2 = slurp(j2.path);
    CHECK_FALSE(s1.empty());
    CHECK(s1 == s2);

    const json rep = json::parse(s1);
    CHECK(rep.at("kind") == "coverage");
    CHECK(rep.at("config").at("master_seed") == 5);
    CHECK(rep.at("cells").at(0).at("effective") == 120);

    // a moment run through the same front end
    TempFile mj("/tmp/truncgeo_cli_mom.json");
    REQUIRE(run_cli({"moment", "--model", "trunc_exp", "--true", "theta=2,gamma=0", "--priors",
                     "theta", "--n", "15,30", "--reps", "100", "--seed", "6", "--out-json",
                     mj.path}) == 0);
    const json mrep = json::parse(slurp(mj.path));
    CHECK(mrep.at("kind") == "moment");
    CHECK(mrep.at("cells").size() == 2);
    // the matched prior's endpoint gap is identically zero
    CHECK(std::fabs(mrep.at("cells").at(0).at("mean_n2_gamma_gap").get<double>()) < 1e-5);

    // bad experiment configuration exits with the configuration code
    CHECK(run_cli({"coverage", "--model", "trunc_exp", "--true", "theta=2,gamma=0", "--priors",
                   "1/theta", "--n", "15", "--reps", "10", "--seed", "5", "--out-json",
                   "/tmp/truncgeo_cli_cov_bad.json"}) == 2);
}
