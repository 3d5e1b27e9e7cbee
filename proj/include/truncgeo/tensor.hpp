#pragma once

#include <Eigen/Dense>
#include <vector>

namespace truncgeo {

// Dense tensor over r slots of dimension d, stored flat in row-major
// multi-index order: index(i_1..i_r) = sum_k i_k d^(r-1-k). This matches the
// Kronecker-power convention, so contracting with kron_pow(u, r) reproduces
// the A'(u^{(x)r}) pairings used throughout.
struct ATensor {
    int d = 0;
    int r = 0;          // theta slots
    int s = 0;          // gamma derivative order (metadata only)
    std::vector<double> data;

    ATensor() = default;
    ATensor(int d_, int r_, int s_ = 0);

    double& at(const std::vector<int>& idx);
    double at(const std::vector<int>& idx) const;
    std::size_t size() const { return data.size(); }
};

std::size_t flat_index(const std::vector<int>& idx, int d);

// u^{(x)r} as a flat vector of length d^r.
std::vector<double> kron_pow(const Eigen::VectorXd& u, int r);

// Kronecker product of two flat tensors (ranks add).
std::vector<double> kron(const std::vector<double>& a, const std::vector<double>& b);

double dot(const std::vector<double>& a, const std::vector<double>& b);

// Row-major vec of a square matrix (d^2 flat tensor).
std::vector<double> vec(const Eigen::MatrixXd& m);

// Symmetrizer S_r: average over all permutations of the r slots.
std::vector<double> symmetrize(const std::vector<double>& data, int d, int r);

// E[u^{(x)r}] for u ~ N(0, Sigma): zero for odd r, (r-1)!! S_r vec(Sigma)^{(x)r/2}
// for even r.
std::vector<double> gaussian_moment(int r, const Eigen::MatrixXd& sigma);

double double_factorial(int n);

}  // namespace truncgeo
