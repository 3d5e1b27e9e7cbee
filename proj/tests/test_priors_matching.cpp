// Prior registry and the probability/moment matching conditions.
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "truncgeo/errors.hpp"
#include "truncgeo/geometry.hpp"
#include "truncgeo/matching.hpp"
#include "truncgeo/model.hpp"
#include "truncgeo/prior.hpp"

using namespace truncgeo;

namespace {

ParamPoint pt(std::initializer_list<double> theta, double gamma) {
    Eigen::VectorXd t(static_cast<Eigen::Index>(theta.size()));
    Eigen::Index k = 0;
    for (double v : theta) t[k++] = v;
    return ParamPoint{t, gamma};
}

}  // namespace

TEST_CASE("built-in priors evaluate to their closed forms") {
    const ModelSpec m = make_model("trunc_exp");
    const double th = 2.0;
    const ParamPoint p = pt({th}, 0.3);

    // volume element is exactly 1: sqrt(det g * g_gg) = sqrt(1/th^2 * th^2)
    CHECK(jeffreys_prior().log_density(m, p) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

    // alpha-parallel: log e_{0, alpha/2}; alpha = -1 gives -log theta
    CHECK(alpha_parallel_prior(-1.0).log_density(m, p) ==
          doctest::Approx(-std::log(th)).epsilon(1e-9));
    CHECK(alpha_parallel_prior(1.0).log_density(m, p) ==
          doctest::Approx(std::log(th)).epsilon(1e-9));
    CHECK(alpha_parallel_prior(0.0).log_density(m, p) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

    // extended volume exponents
    CHECK(extended_volume_prior(0.5, 0.0).log_density(m, p) ==
          doctest::Approx(-std::log(th)).epsilon(1e-9));
    CHECK(extended_volume_prior(0.0, 0.5).log_density(m, p) ==
          doctest::Approx(std::log(th)).epsilon(1e-9));

    // flat prior: constant zero with zero closed gradient
    const PriorSpec flat = flat_prior();
    CHECK(flat.log_density(m, p) == 0.0);
    const auto [gth, gg] = flat.grad_log_density(m, p);
    CHECK(gth.norm() == 0.0);
    CHECK(gg == 0.0);

    // alpha-parallel priors need exponential structure
    const ModelSpec msd = make_model("trunc_normal_meansd");
    CHECK_THROWS_AS(alpha_parallel_prior(0.5).log_density(msd, pt({0.0, 1.0}, 0.0)),
                    ConfigError);
}

TEST_CASE("prior registry parses names, parameters, and expressions") {
    const ModelSpec m = make_model("trunc_exp");
    const ParamPoint p = pt({1.7}, -0.4);

    CHECK(make_prior("flat").log_density(m, p) == 0.0);
    CHECK(make_prior("jeffreys").log_density(m, p) ==
          doctest::Approx(jeffreys_prior().log_density(m, p)).epsilon(1e-12));
    CHECK(make_prior("alpha_parallel:-1").log_density(m, p) ==
          doctest::Approx(-std::log(1.7)).epsilon(1e-9));
    CHECK(make_prior("extended_volume:0.5,0").log_density(m, p) ==
          doctest::Approx(-std::log(1.7)).epsilon(1e-9));

    // expressions: theta == theta_1, gamma allowed, pi constant allowed
    CHECK(make_prior("1/theta").log_density(m, p) == doctest::Approx(-std::log(1.7)));
    CHECK(make_prior("theta^2 * exp(-gamma)").log_density(m, p) ==
          doctest::Approx(2 * std::log(1.7) + 0.4));
    CHECK(make_prior("pi").log_density(m, p) == doctest::Approx(std::log(M_PI)));

    // malformed or x-dependent expressions fail at construction
    CHECK_THROWS_AS(make_prior("theta +"), ConfigError);
    CHECK_THROWS_AS(make_prior("x * theta"), ConfigError);
    CHECK_THROWS_AS(make_prior("alpha_parallel:"), ConfigError);
    CHECK_THROWS_AS(make_prior("extended_volume:1"), ConfigError);

    // nonpositive prior values surface as domain errors at evaluation
    CHECK_THROWS_AS(make_prior("theta - 2").log_density(m, p), DomainError);
}

TEST_CASE("prior gradients agree with finite differences of the log density") {
    const ModelSpec m = make_model("trunc_exp");
    const ParamPoint p = pt({1.4}, 0.2);

    // closed-form expectation: d log(theta^2 e^{-gamma})/d theta = 2/theta,
    // d/d gamma = -1
    const PriorSpec expr = make_prior("theta^2 * exp(-gamma)");
    const auto [gt, gg] = expr.grad_log_density(m, p);
    CHECK(gt[0] == doctest::Approx(2.0 / 1.4).epsilon(1e-7));
    CHECK(gg == doctest::Approx(-1.0).epsilon(1e-7));

    // numeric gradient of a geometry-backed prior matches its own values
    const PriorSpec jef = jeffreys_prior();
    const auto [jt, jg] = jef.grad_log_density(m, p);
    const double h = 1e-5;
    auto logpi = [&](double th, double ga) { return jef.log_density(m, pt({th}, ga)); };
    CHECK(jt[0] == doctest::Approx((logpi(1.4 + h, 0.2) - logpi(1.4 - h, 0.2)) / (2 * h))
                       .epsilon(1e-5)
                       .scale(1.0));
    CHECK(jg == doctest::Approx((logpi(1.4, 0.2 + h) - logpi(1.4, 0.2 - h)) / (2 * h))
                    .epsilon(1e-5)
                    .scale(1.0));
}

TEST_CASE("known solutions annihilate their matching conditions on a grid") {
    const ModelSpec m = make_model("trunc_exp");

    // 1/theta solves both probability conditions; theta solves the gamma
    // moment condition; constants solve the theta moment condition.
    const PriorSpec pm = make_prior("1/theta");
    const PriorSpec mm_g = make_prior("theta");
    const PriorSpec mm_t = make_prior("flat");

    for (int i = 0; i < 10; ++i) {
        const double th = 0.5 + 4.5 * i / 9.0;
        for (int j = 0; j < 5; ++j) {
            const double ga = -1.0 + 2.0 * j / 4.0;
            const ParamPoint p = pt({th}, ga);
            CHECK_MESSAGE(std::fabs(matching_residual(m, p, pm, MatchKind::PmGamma)) < 1e-6,
                          "pm_gamma at theta=" << th << " gamma=" << ga);
            CHECK_MESSAGE(std::fabs(matching_residual(m, p, pm, MatchKind::PmTheta)) < 1e-6,
                          "pm_theta at theta=" << th << " gamma=" << ga);
            CHECK_MESSAGE(std::fabs(matching_residual(m, p, mm_g, MatchKind::MmGamma)) < 1e-6,
                          "mm_gamma at theta=" << th << " gamma=" << ga);
            CHECK_MESSAGE(std::fabs(matching_residual(m, p, mm_t, MatchKind::MmTheta)) < 1e-6,
                          "mm_theta at theta=" << th << " gamma=" << ga);
        }
    }

    // non-solutions give visibly nonzero residuals
    CHECK(std::fabs(matching_residual(m, pt({2.0}, 0.0), mm_g, MatchKind::PmGamma)) > 0.1);
    CHECK(std::fabs(matching_residual(m, pt({2.0}, 0.0), pm, MatchKind::MmGamma)) > 0.1);
}

TEST_CASE("volume-element priors satisfy the gamma conditions on any exponential family") {
    // e_{1/2,0} annihilates the probability condition and e_{0,1/2} the
    // moment condition identically, whatever the family.
    const PriorSpec pm_e = extended_volume_prior(0.5, 0.0);
    const PriorSpec mm_e = extended_volume_prior(0.0, 0.5);

    const ModelSpec nat = make_model("trunc_normal_natural");
    for (const ParamPoint& p : {pt({0.3, -0.5}, 0.0), pt({-0.2, -0.8}, 0.4),
                                pt({0.6, -0.35}, -0.7)}) {
        CHECK(std::fabs(matching_residual(nat, p, pm_e, MatchKind::PmGamma)) < 1e-6);
        CHECK(std::fabs(matching_residual(nat, p, mm_e, MatchKind::MmGamma)) < 1e-6);
    }

    const ModelSpec ex = make_model("trunc_exp");
    const ParamPoint q = pt({1.2}, 0.1);
    CHECK(std::fabs(matching_residual(ex, q, pm_e, MatchKind::PmGamma)) < 1e-6);
    CHECK(std::fabs(matching_residual(ex, q, mm_e, MatchKind::MmGamma)) < 1e-6);
}

TEST_CASE("residuals are invariant under rescaling the prior") {
    // every condition involves pi only through d log pi
    const ModelSpec m = make_model("trunc_exp");
    const ParamPoint p = pt({1.8}, -0.3);
    const PriorSpec a = make_prior("theta^2");
    const PriorSpec b = make_prior("7.3 * theta^2");
    for (MatchKind kind :
         {MatchKind::PmGamma, MatchKind::PmTheta, MatchKind::MmGamma, MatchKind::MmTheta}) {
        const double ra = matching_residual(m, p, a, kind);
        const double rb = matching_residual(m, p, b, kind);
        CHECK(ra == doctest::Approx(rb).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("flow form and coordinate form of the gamma conditions agree") {
    // The derivative along the expectation-preserving direction restates the
    // printed equations; both forms must vanish or not together, and in fact
    // match numerically once the same prior is plugged in.
    const std::vector<std::string> priors = {"theta^2", "exp(theta/2)", "1/(theta^2) * exp(gamma)"};
    const ModelSpec ex = make_model("trunc_exp");
    const ParamPoint p = pt({1.5}, 0.25);
    for (const std::string& text : priors) {
        const PriorSpec prior = make_prior(text);
        for (MatchKind kind : {MatchKind::PmGamma, MatchKind::MmGamma}) {
            const double pde = matching_residual(ex, p, prior, kind);
            const double lie = lie_residual(ex, p, prior, kind);
            CHECK_MESSAGE(pde == doctest::Approx(lie).epsilon(1e-5).scale(1.0),
                          text << " kind=" << match_kind_name(kind));
        }
    }

    const ModelSpec nat = make_model("trunc_normal_natural");
    const ParamPoint q = pt({0.4, -0.6}, 0.2);
    const PriorSpec prior2 = make_prior("exp(theta_1) * (1 - 1/theta_2)");
    for (MatchKind kind : {MatchKind::PmGamma, MatchKind::MmGamma}) {
        const double pde = matching_residual(nat, q, prior2, kind);
        const double lie = lie_residual(nat, q, prior2, kind);
        CHECK_MESSAGE(pde == doctest::Approx(lie).epsilon(1e-5).scale(1.0),
                      "normal kind=" << match_kind_name(kind));
    }

    // the flow form requires exponential structure and a gamma-condition kind
    const ModelSpec msd = make_model("trunc_normal_meansd");
    CHECK_THROWS_AS(lie_residual(msd, pt({0.0, 1.0}, 0.0), make_prior("flat"),
                                 MatchKind::PmGamma),
                    ConfigError);
    CHECK_THROWS_AS(lie_residual(ex, p, make_prior("flat"), MatchKind::PmTheta), ConfigError);
}

TEST_CASE("matching kinds map to and from their names") {
    CHECK(match_kind_from_name("pm_gamma") == MatchKind::PmGamma);
    CHECK(match_kind_from_name("pm_theta") == MatchKind::PmTheta);
    CHECK(match_kind_from_name("mm_gamma") == MatchKind::MmGamma);
    CHECK(match_kind_from_name("mm_theta") == MatchKind::MmTheta);
    CHECK(match_kind_name(MatchKind::MmTheta) == "mm_theta");
    CHECK_THROWS_AS(match_kind_from_name("nonsense"), ConfigError);
}
