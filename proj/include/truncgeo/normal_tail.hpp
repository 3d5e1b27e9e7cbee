#pragma once

namespace truncgeo {

// Standard normal density, CDF, upper tail, and the log upper tail
// Psi(v) = log(1 - Phi(v)) together with its first four derivatives, all
// expressed through the hazard lambda(v) = phi(v) / (1 - Phi(v)).
double norm_pdf(double v);
double norm_cdf(double v);
double norm_ccdf(double v);

double psi_tail(double v);       // Psi(v)
double psi_tail_d1(double v);    // -lambda
double psi_tail_d2(double v);    // v lambda - lambda^2
double psi_tail_d3(double v);    // (1 - v^2) lambda + 3 v lambda^2 - 2 lambda^3
double psi_tail_d4(double v);    // (v^3 - 3v) lambda + (4 - 7v^2) lambda^2 + 12 v lambda^3 - 6 lambda^4
double hazard(double v);

// Inverse of the upper tail: returns v with norm_ccdf(v) = p, p in (0, 1).
double norm_ccdf_inv(double p);

// Standard normal quantile.
double norm_quantile(double p);

}  // namespace truncgeo
