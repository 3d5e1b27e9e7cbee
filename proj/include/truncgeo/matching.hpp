#pragma once

#include "truncgeo/model.hpp"
#include "truncgeo/prior.hpp"
#include "truncgeo/quadrature.hpp"

namespace truncgeo {

// The four matching conditions. The theta conditions are per-component
// families; `component` picks i (zero-based) and is ignored by the gamma
// conditions.
enum class MatchKind { PmGamma, PmTheta, MmGamma, MmTheta };

MatchKind match_kind_from_name(const std::string& name);  // "pm_gamma" etc.
std::string match_kind_name(MatchKind kind);

// Residual (LHS - RHS) of the condition exactly as its equation is printed;
// zero iff the prior satisfies the condition at p. Coefficient derivatives
// (d log c, d A^(1,1), d log det g_theta, ...) come from central finite
// differences of the underlying maps.
double matching_residual(const ModelSpec& m, const ParamPoint& p, const PriorSpec& prior,
                         MatchKind kind, int component = 0, const QuadratureConfig& cfg = {});

// Lie-derivative form along chi, defined on exponential-type families only:
// PM: L_chi{log pi - log det g_theta - 1/2 log g_gg} = 0,
// MM: L_chi{log pi - 1/2 log det g_theta - log g_gg} = 0.
// `kind` must be PmGamma or MmGamma.
double lie_residual(const ModelSpec& m, const ParamPoint& p, const PriorSpec& prior,
                    MatchKind kind, const QuadratureConfig& cfg = {});

}  // namespace truncgeo
