#include "truncgeo/mle.hpp"

#include <cmath>
#include <vector>

#include "truncgeo/errors.hpp"
#include "truncgeo/expectations.hpp"
#include "truncgeo/fd.hpp"

namespace truncgeo {

namespace {

constexpr double kScoreTol = 1e-8;
constexpr int kMaxIterations = 100;
constexpr int kMaxHalvings = 40;

// Sum over the sample of D_theta log q(x_j; theta). On an exponential
// family this is the constant vector of sufficient statistics sum_j F_i(x_j).
class ScoreAccumulator {
  public:
    ScoreAccumulator(const ModelSpec& m, const Sample& sample) : m_(m), sample_(sample) {
        if (m.is_otef) {
            suff_ = Eigen::VectorXd::Zero(m.d);
            for (double x : sample.values)
                for (int i = 0; i < m.d; ++i) suff_[i] += m.F[i](x);
        }
    }

    Eigen::VectorXd score(const ParamPoint& p, const QuadratureConfig& cfg) const {
        Eigen::VectorXd s = m_.is_otef ? suff_ : sum_logq_grad(p);
        for (int i = 0; i < m_.d; ++i) {
            std::vector<int> orders(m_.d, 0);
            orders[i] = 1;
            s[i] -= static_cast<double>(sample_.size()) * psi_partial(m_, p, orders, 0, cfg);
        }
        return s;
    }

    // Observed information -sum_j D^2 log p = -sum_j D^2 log q + n D^2 psi.
    Eigen::MatrixXd information(const ParamPoint& p, const QuadratureConfig& cfg) const {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m_.d, m_.d);
        if (!m_.is_otef) h = -sum_logq_hessian(p);
        for (int i = 0; i < m_.d; ++i)
            for (int j = i; j < m_.d; ++j) {
                std::vector<int> orders(m_.d, 0);
                ++orders[i];
                ++orders[j];
                const double v =
                    static_cast<double>(sample_.size()) * psi_partial(m_, p, orders, 0, cfg);
                h(i, j) += v;
                if (i != j) h(j, i) += v;
            }
        return h;
    }

  private:
    Eigen::VectorXd sum_logq_grad(const ParamPoint& p) const {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(m_.d);
        for (double x : sample_.values)
            for (int i = 0; i < m_.d; ++i) {
                std::vector<int> orders(m_.d, 0);
                orders[i] = 1;
                s[i] += logq_theta_partial(x, p, orders);
            }
        return s;
    }

    Eigen::MatrixXd sum_logq_hessian(const ParamPoint& p) const {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m_.d, m_.d);
        for (double x : sample_.values)
            for (int i = 0; i < m_.d; ++i)
                for (int j = i; j < m_.d; ++j) {
                    std::vector<int> orders(m_.d, 0);
                    ++orders[i];
                    ++orders[j];
                    const double v = logq_theta_partial(x, p, orders);
                    h(i, j) += v;
                    if (i != j) h(j, i) += v;
                }
        return h;
    }

    double logq_theta_partial(double x, const ParamPoint& p, const std::vector<int>& orders) const {
        if (m_.logq_partial_closed) return m_.logq_partial_closed(x, p, orders);
        std::vector<double> v(static_cast<size_t>(m_.d));
        for (int i = 0; i < m_.d; ++i) v[i] = p.theta[i];
        fd::ScalarFn f = [&](const std::vector<double>& w) {
            Eigen::VectorXd th(m_.d);
            for (int i = 0; i < m_.d; ++i) th[i] = w[i];
            return m_.log_q(x, ParamPoint{th, p.gamma});
        };
        return fd::partial(f, v, orders);
    }

    const ModelSpec& m_;
    const Sample& sample_;
    Eigen::VectorXd suff_;
};

}  // namespace

MleResult fit_mle(const ModelSpec& m, const Sample& sample, const QuadratureConfig& cfg) {
    const std::size_t n = sample.size();
    if (n < static_cast<std::size_t>(m.d) + 1)
        throw DomainError("fit_mle needs at least d + 1 observations");
    const double gamma_hat = sample.min();
    if (!(gamma_hat > m.trunc_interval.lo) || !(sample.values.back() < m.trunc_interval.hi))
        throw DomainError("sample values outside the truncation interval");

    MleResult r;
    r.n = n;
    r.gamma_hat = gamma_hat;

    ScoreAccumulator acc(m, sample);
    Eigen::VectorXd theta = m.theta_init ? m.theta_init(sample, gamma_hat)
                                         : Eigen::VectorXd::Ones(m.d);
    if (!m.theta_in_domain(theta)) theta = Eigen::VectorXd::Ones(m.d);

    ParamPoint p{theta, gamma_hat};
    Eigen::VectorXd s = acc.score(p, cfg);
    double snorm = s.norm();
    int iter = 0;
    for (; iter < kMaxIterations && !(snorm < kScoreTol); ++iter) {
        const Eigen::MatrixXd h = acc.information(p, cfg);
        Eigen::VectorXd delta;
        const Eigen::LLT<Eigen::MatrixXd> llt(h);
        if (llt.info() == Eigen::Success)
            delta = llt.solve(s);
        else
            delta = h.colPivHouseholderQr().solve(s);
        if (!delta.allFinite()) break;

        double lambda = 1;
        bool accepted = false;
        for (int halving = 0; halving < kMaxHalvings; ++halving, lambda *= 0.5) {
            const Eigen::VectorXd cand = p.theta + lambda * delta;
            if (!m.theta_in_domain(cand)) continue;
            const ParamPoint pc{cand, gamma_hat};
            const Eigen::VectorXd sc = acc.score(pc, cfg);
            if (sc.allFinite() && (sc.norm() < snorm || snorm < 1e-14)) {
                p = pc;
                s = sc;
                snorm = sc.norm();
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }

    r.theta_hat = p.theta;
    r.converged = snorm < kScoreTol;
    r.iterations = iter;

    const ATensor a20 = a_tensor(m, p, 2, 0, cfg);
    r.g_theta_hat = Eigen::MatrixXd(m.d, m.d);
    for (int i = 0; i < m.d; ++i)
        for (int j = 0; j < m.d; ++j)
            r.g_theta_hat(i, j) = -a20.data[static_cast<size_t>(i) * m.d + j];
    r.c_hat = -psi_partial(m, p, std::vector<int>(m.d, 0), 1, cfg);

    const Eigen::LLT<Eigen::MatrixXd> llt(r.g_theta_hat);
    const bool g_pd = llt.info() == Eigen::Success && r.g_theta_hat.allFinite();
    r.degenerate = !r.converged || !(r.c_hat > 0) || !g_pd;
    r.gamma_star = r.c_hat > 0
                       ? gamma_hat - 1.0 / (static_cast<double>(n) * r.c_hat)
                       : gamma_hat;
    return r;
}

}  // namespace truncgeo
