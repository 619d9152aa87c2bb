#pragma once

namespace lagaboost::normal {

/// Standard normal density.
double pdf(double x);

/// Standard normal CDF.
double cdf(double x);

/// log Phi(x), accurate deep into the lower tail.
double log_cdf(double x);

/// Quantities of the log-CDF needed for probit derivatives, evaluated at z:
///   ratio   = phi(z) / Phi(z)
///   shifted = z + ratio                 (> 0, computed without cancellation)
///   curv    = (z + r)(z + 2r) - 1       (computed without cancellation)
/// so that d/dz log Phi = ratio, d2 = -ratio * shifted, d3 = ratio * curv.
struct MillsTerms {
  double ratio;
  double shifted;
  double curv;
};

MillsTerms mills_terms(double z);

/// Inverse of the standard normal CDF for p in (0, 1).
double quantile(double p);

}  // namespace lagaboost::normal
