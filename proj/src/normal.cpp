#include "lagaboost/normal.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lagaboost::normal {
namespace {

constexpr double kTailSwitch = -5.0;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// Laplace continued fraction for the Mills ratio Phi(-t)/phi(t) = 1/(t + u1),
// with u_k = k / (t + u_{k+1}). Returns u1, u2, u3 by backward recurrence.
struct TailFraction {
  double u1, u2, u3;
};

TailFraction tail_fraction(double t) {
  // Depth grows as the fraction converges more slowly near the switch point.
  const int depth = 60 + static_cast<int>(2000.0 / (t * t));
  double u = 0.0;
  double u3 = 0.0, u2 = 0.0;
  for (int k = depth; k >= 1; --k) {
    u = k / (t + u);
    if (k == 3) u3 = u;
    if (k == 2) u2 = u;
  }
  return {u, u2, u3};
}

}  // namespace

double pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_cdf(double x) {
  if (x < kTailSwitch) {
    const double t = -x;
    const auto frac = tail_fraction(t);
    return -0.5 * x * x - kLogSqrt2Pi - std::log(t + frac.u1);
  }
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  return std::log(cdf(x));
}

MillsTerms mills_terms(double z) {
  if (z < kTailSwitch) {
    const double t = -z;
    const auto f = tail_fraction(t);
    // r = t + u1, z + r = u1, (z + r)(z + 2r) - 1 = u1^2 u2 (u3 - u2)
    return {t + f.u1, f.u1, f.u1 * f.u1 * f.u2 * (f.u3 - f.u2)};
  }
  const double r = pdf(z) / cdf(z);
  const double shifted = z + r;
  return {r, shifted, shifted * (z + 2.0 * r) - 1.0};
}

double quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal::quantile requires p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

}  // namespace lagaboost::normal
