#pragma once

#include <functional>
#include <vector>

namespace truncgeo {

struct QuadratureConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    int max_subdivisions = 200;
};

struct QuadResult {
    double value = 0;
    double error = 0;   // estimated absolute error
    int subdivisions = 0;
};

// Gauss-Legendre rule of order n on [-1, 1]. Nodes ascending; cached per n.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

// Adaptive integration of f over the finite interval [a, b]: embedded
// 10/21-point Gauss pair per panel, worst-panel-first bisection. Throws
// QuadratureError (carrying the best estimate) if the subdivision budget is
// exhausted before the tolerance is met.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadratureConfig& cfg = {});

}  // namespace truncgeo
