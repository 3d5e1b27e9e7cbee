#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "truncgeo/model.hpp"
#include "truncgeo/tensor.hpp"

namespace truncgeo {

// How a_tensor obtains its entries. Auto exploits structure: gamma
// derivatives of log p are x-free (-psi partials), and theta derivatives of
// order >= 2 are x-free on an exponential family. Quadrature forces honest
// integration of the pointwise partials for every entry.
enum class ATensorMode { Auto, Quadrature };

// E[f(X)] at the given parameter point. Uses the model's quantile
// substitution when available (the density is absorbed into du); otherwise,
// or when force_rational is set, integrates f * p through the rational tail
// map x = gamma + scale * u / (1 - u).
double expect(const ModelSpec& m, const ParamPoint& p, const std::function<double(double)>& f,
              const QuadratureConfig& cfg = {}, bool force_rational = false);

// A^(r,s) = E[ D_theta^{(x)r} (d_gamma)^s log p ], flat d^r tensor.
ATensor a_tensor(const ModelSpec& m, const ParamPoint& p, int r, int s,
                 const QuadratureConfig& cfg = {}, ATensorMode mode = ATensorMode::Auto);

// c = A^(0,1) = -d_gamma psi.
double c_value(const ModelSpec& m, const ParamPoint& p, const QuadratureConfig& cfg = {});

// E of a product of mixed log-density partials; each factor is (theta
// orders, gamma order). Always integrates.
double expect_partial_product(const ModelSpec& m, const ParamPoint& p,
                              const std::vector<std::pair<std::vector<int>, int>>& factors,
                              const QuadratureConfig& cfg = {});

}  // namespace truncgeo
