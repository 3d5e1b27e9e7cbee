#include "truncgeo/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "truncgeo/errors.hpp"

namespace truncgeo {

namespace {

std::size_t pow_int(int d, int r) {
    std::size_t n = 1;
    for (int k = 0; k < r; ++k) n *= static_cast<std::size_t>(d);
    return n;
}

void unflatten(std::size_t flat, int d, int r, std::vector<int>& idx) {
    idx.resize(r);
    for (int k = r - 1; k >= 0; --k) {
        idx[k] = static_cast<int>(flat % d);
        flat /= d;
    }
}

}  // namespace

ATensor::ATensor(int d_, int r_, int s_) : d(d_), r(r_), s(s_), data(pow_int(d_, r_), 0.0) {
    if (d_ < 1 || r_ < 0) throw DomainError("ATensor: bad dimensions");
}

std::size_t flat_index(const std::vector<int>& idx, int d) {
    std::size_t flat = 0;
    for (int i : idx) {
        if (i < 0 || i >= d) throw DomainError("flat_index: index out of range");
        flat = flat * d + i;
    }
    return flat;
}

double& ATensor::at(const std::vector<int>& idx) { return data[flat_index(idx, d)]; }
double ATensor::at(const std::vector<int>& idx) const { return data[flat_index(idx, d)]; }

std::vector<double> kron_pow(const Eigen::VectorXd& u, int r) {
    std::vector<double> out{1.0};
    const int d = static_cast<int>(u.size());
    for (int k = 0; k < r; ++k) {
        std::vector<double> next(out.size() * d);
        for (std::size_t i = 0; i < out.size(); ++i)
            for (int j = 0; j < d; ++j) next[i * d + j] = out[i] * u[j];
        out = std::move(next);
    }
    return out;
}

std::vector<double> kron(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
    return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DomainError("dot: size mismatch");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

std::vector<double> vec(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw DomainError("vec: matrix not square");
    std::vector<double> out(static_cast<std::size_t>(m.rows()) * m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
    return out;
}

std::vector<double> symmetrize(const std::vector<double>& data, int d, int r) {
    if (data.size() != pow_int(d, r)) throw DomainError("symmetrize: size mismatch");
    if (r <= 1) return data;
    std::vector<int> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> out(data.size(), 0.0);
    std::vector<int> idx, pidx(r);
    std::size_t nperm = 0;
    do {
        ++nperm;
        for (std::size_t flat = 0; flat < data.size(); ++flat) {
            unflatten(flat, d, r, idx);
            for (int k = 0; k < r; ++k) pidx[k] = idx[perm[k]];
            out[flat] += data[flat_index(pidx, d)];
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (double& v : out) v /= static_cast<double>(nperm);
    return out;
}

double double_factorial(int n) {
    double v = 1;
    for (int k = n; k > 1; k -= 2) v *= k;
    return v;
}

std::vector<double> gaussian_moment(int r, const Eigen::MatrixXd& sigma) {
    const int d = static_cast<int>(sigma.rows());
    if (r % 2 == 1) return std::vector<double>(pow_int(d, r), 0.0);
    if (r == 0) return {1.0};
    std::vector<double> v = vec(sigma);
    std::vector<double> prod{1.0};
    for (int k = 0; k < r / 2; ++k) prod = kron(prod, v);
    prod = symmetrize(prod, d, r);
    const double c = double_factorial(r - 1);
    for (double& x : prod) x *= c;
    return prod;
}

}  // namespace truncgeo
