// Finite differences, quadrature, tensor algebra, normal-tail functions, RNG.
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "truncgeo/errors.hpp"
#include "truncgeo/fd.hpp"
#include "truncgeo/normal_tail.hpp"
#include "truncgeo/quadrature.hpp"
#include "truncgeo/rng.hpp"
#include "truncgeo/tensor.hpp"

using namespace truncgeo;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("finite differences reproduce known derivatives") {
    // f(x, y) = exp(x) * sin(y) has every mixed partial in closed form.
    fd::ScalarFn f = [](const std::vector<double>& p) { return std::exp(p[0]) * std::sin(p[1]); };
    const std::vector<double> at{0.3, 0.7};
    const double ex = std::exp(0.3), sy = std::sin(0.7), cy = std::cos(0.7);

    CHECK(fd::partial(f, at, {0, 0}) == doctest::Approx(ex * sy).epsilon(1e-14));
    CHECK(fd::partial(f, at, {1, 0}) == doctest::Approx(ex * sy).epsilon(1e-9));
    CHECK(fd::partial(f, at, {0, 1}) == doctest::Approx(ex * cy).epsilon(1e-9));
    CHECK(fd::partial(f, at, {1, 1}) == doctest::Approx(ex * cy).epsilon(1e-8));
    CHECK(fd::partial(f, at, {2, 0}) == doctest::Approx(ex * sy).epsilon(1e-8));
    CHECK(fd::partial(f, at, {2, 1}) == doctest::Approx(ex * cy).epsilon(1e-7));
    CHECK(fd::partial(f, at, {1, 2}) == doctest::Approx(-ex * sy).epsilon(1e-7));
    CHECK(fd::partial(f, at, {3, 0}) == doctest::Approx(ex * sy).epsilon(1e-7));
    CHECK(fd::partial(f, at, {2, 2}) == doctest::Approx(-ex * sy).epsilon(1e-5));
    CHECK(fd::partial(f, at, {4, 0}) == doctest::Approx(ex * sy).epsilon(1e-5));

    CHECK_THROWS_AS(fd::partial(f, at, {3, 2}), DomainError);
    CHECK_THROWS_AS(fd::partial(f, at, {1}), DomainError);
    CHECK_THROWS_AS(fd::partial(f, at, {-1, 0}), DomainError);
}

TEST_CASE("gauss-legendre rules integrate polynomials exactly") {
    // An n-point rule is exact through degree 2n - 1.
    for (int n : {2, 5, 8, 10, 21}) {
        const GaussRule& rule = gauss_legendre(n);
        REQUIRE(rule.nodes.size() == static_cast<size_t>(n));
        for (int deg = 0; deg <= 2 * n - 1; ++deg) {
            double acc = 0;
            for (int k = 0; k < n; ++k) acc += rule.weights[k] * std::pow(rule.nodes[k], deg);
            const double exact = (deg % 2 == 1) ? 0.0 : 2.0 / (deg + 1);
            CHECK(acc == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
        // weights sum to the interval length and nodes are ascending
        double wsum = 0;
        for (double w : rule.weights) wsum += w;
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
        for (int k = 1; k < n; ++k) CHECK(rule.nodes[k] > rule.nodes[k - 1]);
    }
}

TEST_CASE("adaptive integration meets tolerance on hard integrands") {
    // smooth: int_0^1 e^x = e - 1
    auto r1 = integrate([](double x) { return std::exp(x); }, 0, 1);
    CHECK(r1.value == doctest::Approx(std::exp(1.0) - 1).epsilon(1e-12));

    // peaked: int_-1^1 1/(x^2 + 1e-4) = 2 atan(100) * 100
    auto r2 = integrate([](double x) { return 1.0 / (x * x + 1e-4); }, -1, 1);
    CHECK(r2.value == doctest::Approx(200.0 * std::atan(100.0)).epsilon(1e-9));
    CHECK(r2.subdivisions > 0);

    // mild endpoint singularity in the derivative: int_0^1 sqrt(x) = 2/3
    auto r3 = integrate([](double x) { return std::sqrt(x); }, 0, 1);
    CHECK(r3.value == doctest::Approx(2.0 / 3.0).epsilon(1e-9));

    // budget exhaustion reports the best estimate
    QuadratureConfig tight;
    tight.rel_tol = 1e-15;
    tight.abs_tol = 1e-300;
    tight.max_subdivisions = 3;
    try {
        integrate([](double x) { return 1.0 / (x * x + 1e-8); }, -1, 1, tight);
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        CHECK(std::isfinite(e.best_estimate));
        CHECK(e.error_estimate > 0);
    }
}

TEST_CASE("tensor flat indexing matches the kronecker convention") {
    // (A (x) B)[i d^1 + j] = A[i] B[j] for d = 3, r = 2
    Eigen::VectorXd u(3);
    u << 2, 3, 5;
    const std::vector<double> u2 = kron_pow(u, 2);
    REQUIRE(u2.size() == 9);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(u2[flat_index({i, j}, 3)] == doctest::Approx(u[i] * u[j]));

    ATensor t(3, 2, 0);
    t.at({1, 2}) = 7;
    CHECK(t.data[1 * 3 + 2] == 7);
    CHECK(t.at({1, 2}) == 7);

    const std::vector<double> uu = kron(std::vector<double>{2, 3, 5}, std::vector<double>{1, 4});
    REQUIRE(uu.size() == 6);
    CHECK(uu[0] == 2);   // (0,0)
    CHECK(uu[1] == 8);   // (0,1)
    CHECK(uu[5] == 20);  // (2,1)

    CHECK(dot({1, 2, 3}, {4, 5, 6}) == doctest::Approx(32));

    Eigen::MatrixXd m(2, 2);
    m << 1, 2, 3, 4;
    const std::vector<double> v = vec(m);
    CHECK(v == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("symmetrizer averages slot permutations and is idempotent") {
    // rank-2, d=2: S(e_0 (x) e_1) has 1/2 at (0,1) and (1,0)
    std::vector<double> t(4, 0.0);
    t[flat_index({0, 1}, 2)] = 1.0;
    const std::vector<double> s = symmetrize(t, 2, 2);
    CHECK(s[flat_index({0, 1}, 2)] == doctest::Approx(0.5));
    CHECK(s[flat_index({1, 0}, 2)] == doctest::Approx(0.5));
    CHECK(s[flat_index({0, 0}, 2)] == doctest::Approx(0.0));

    // idempotence on a random rank-3 tensor
    std::vector<double> r3(8);
    for (size_t k = 0; k < r3.size(); ++k) r3[k] = std::sin(static_cast<double>(k) + 1);
    const std::vector<double> s1 = symmetrize(r3, 2, 3);
    const std::vector<double> s2 = symmetrize(s1, 2, 3);
    for (size_t k = 0; k < s1.size(); ++k) CHECK(s2[k] == doctest::Approx(s1[k]).epsilon(1e-15));

    // a symmetric tensor is a fixed point
    std::vector<double> sym(4, 0.0);
    sym[flat_index({0, 1}, 2)] = 3.0;
    sym[flat_index({1, 0}, 2)] = 3.0;
    const std::vector<double> fix = symmetrize(sym, 2, 2);
    for (size_t k = 0; k < sym.size(); ++k) CHECK(fix[k] == doctest::Approx(sym[k]));
}

TEST_CASE("gaussian moments match isserlis pairings") {
    CHECK(double_factorial(-1) == 1);
    CHECK(double_factorial(1) == 1);
    CHECK(double_factorial(3) == 3);
    CHECK(double_factorial(5) == 15);
    CHECK(double_factorial(7) == 105);

    Eigen::MatrixXd sigma(2, 2);
    sigma << 2.0, 0.6, 0.6, 1.5;

    // r = 2: E[u_i u_j] = Sigma_ij
    const std::vector<double> m2 = gaussian_moment(2, sigma);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(m2[flat_index({i, j}, 2)] == doctest::Approx(sigma(i, j)).epsilon(1e-13));

    // r = 3: odd moments vanish
    for (double x : gaussian_moment(3, sigma)) CHECK(x == doctest::Approx(0.0));

    // r = 4: E[u_i u_j u_k u_l] = S_ij S_kl + S_ik S_jl + S_il S_jk
    const std::vector<double> m4 = gaussian_moment(4, sigma);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    const double exact = sigma(i, j) * sigma(k, l) + sigma(i, k) * sigma(j, l) +
                                         sigma(i, l) * sigma(j, k);
                    CHECK(m4[flat_index({i, j, k, l}, 2)] ==
                          doctest::Approx(exact).epsilon(1e-12));
                }

    // r = 6 diagonal in one dimension: E[u^6] = 15 sigma^6
    Eigen::MatrixXd s1(1, 1);
    s1 << 1.7;
    const std::vector<double> m6 = gaussian_moment(6, s1);
    CHECK(m6[0] == doctest::Approx(15.0 * std::pow(1.7, 3)).epsilon(1e-12));
}

TEST_CASE("gaussian moments agree with quadrature in two dimensions") {
    // Cross-check E[u_0^2 u_1^2] and E[u_0^4] for a correlated normal by
    // direct two-dimensional Gauss-Hermite-style integration on a wide box.
    Eigen::MatrixXd sigma(2, 2);
    sigma << 1.0, 0.4, 0.4, 0.8;
    const Eigen::MatrixXd prec = sigma.inverse();
    const double norm = 1.0 / (2 * kPi * std::sqrt(sigma.determinant()));

    auto moment = [&](int p0, int p1) {
        const GaussRule& rule = gauss_legendre(60);
        const double L = 8.0;
        double acc = 0;
        for (size_t a = 0; a < rule.nodes.size(); ++a)
            for (size_t b = 0; b < rule.nodes.size(); ++b) {
                const double x = L * rule.nodes[a], y = L * rule.nodes[b];
                const double q = prec(0, 0) * x * x + 2 * prec(0, 1) * x * y + prec(1, 1) * y * y;
                acc += rule.weights[a] * rule.weights[b] * std::pow(x, p0) * std::pow(y, p1) *
                       std::exp(-0.5 * q);
            }
        return acc * L * L * norm;
    };

    const std::vector<double> m4 = gaussian_moment(4, sigma);
    CHECK(m4[flat_index({0, 0, 1, 1}, 2)] == doctest::Approx(moment(2, 2)).epsilon(1e-6));
    CHECK(m4[flat_index({0, 0, 0, 0}, 2)] == doctest::Approx(moment(4, 0)).epsilon(1e-6));
    const std::vector<double> m2 = gaussian_moment(2, sigma);
    CHECK(m2[flat_index({0, 1}, 2)] == doctest::Approx(moment(1, 1)).epsilon(1e-6));
}

TEST_CASE("normal tail functions and derivatives are consistent") {
    CHECK(norm_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2 * kPi)).epsilon(1e-15));
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_ccdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(norm_cdf(1.6448536269514722) == doctest::Approx(0.95).epsilon(1e-12));

    // psi_tail(0) = log(1/2)
    CHECK(psi_tail(0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-15));

    // derivative ladder vs finite differences at several points, including
    // moderately deep tail where naive 1 - Phi would lose precision
    for (double v : {-2.0, -0.3, 0.0, 1.1, 3.0, 6.0}) {
        fd::ScalarFn f0 = [](const std::vector<double>& p) { return psi_tail(p[0]); };
        CHECK(psi_tail_d1(v) == doctest::Approx(fd::partial(f0, {v}, {1})).epsilon(1e-7));
        CHECK(psi_tail_d2(v) == doctest::Approx(fd::partial(f0, {v}, {2})).epsilon(1e-6));
        CHECK(psi_tail_d3(v) == doctest::Approx(fd::partial(f0, {v}, {3})).epsilon(1e-4));
        // hazard identity lambda = -d1
        CHECK(hazard(v) == doctest::Approx(-psi_tail_d1(v)).epsilon(1e-13));
    }
    // fourth derivative at a couple of points (wider FD tolerance)
    for (double v : {-0.5, 1.0}) {
        fd::ScalarFn f0 = [](const std::vector<double>& p) { return psi_tail(p[0]); };
        CHECK(psi_tail_d4(v) == doctest::Approx(fd::partial(f0, {v}, {4})).epsilon(2e-3));
    }

    // far tail stays finite and tracks the asymptotic -v^2/2 - log(v sqrt(2 pi))
    const double deep = psi_tail(20.0);
    CHECK(std::isfinite(deep));
    CHECK(deep == doctest::Approx(-200.0 - std::log(20.0 * std::sqrt(2 * kPi))).epsilon(1e-2));

    // quantile inverts the tail
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.9, 1 - 1e-9}) {
        CHECK(norm_ccdf(norm_ccdf_inv(p)) == doctest::Approx(p).epsilon(1e-10));
        CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
    }
}

TEST_CASE("rng streams are deterministic and well distributed") {
    // identical seeds give identical streams
    Rng a(12345), b(12345);
    for (int k = 0; k < 100; ++k) CHECK(a.uniform01() == b.uniform01());

    // different replication coordinates give different seeds
    const std::uint64_t s1 = seed_for(1, 25, 0, 0);
    const std::uint64_t s2 = seed_for(1, 25, 0, 1);
    const std::uint64_t s3 = seed_for(1, 25, 1, 0);
    const std::uint64_t s4 = seed_for(2, 25, 0, 0);
    CHECK(s1 != s2);
    CHECK(s1 != s3);
    CHECK(s1 != s4);
    CHECK(s2 != s3);

    // uniform01 lives in [0, 1) with sane mean/variance over a long run
    Rng r(987);
    double sum = 0, sumsq = 0;
    const int N = 200000;
    for (int k = 0; k < N; ++k) {
        const double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sumsq += u * u;
    }
    const double mean = sum / N;
    const double var = sumsq / N - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(5e-3));
    CHECK(var == doctest::Approx(1.0 / 12).epsilon(2e-2));
}
