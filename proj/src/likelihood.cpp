#include "lagaboost/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lagaboost/normal.hpp"

namespace lagaboost {

std::string to_string(LikelihoodKind kind) {
  switch (kind) {
    case LikelihoodKind::BernoulliProbit: return "bernoulli-probit";
    case LikelihoodKind::PoissonLog: return "poisson-log";
  }
  return "unknown";
}

LikelihoodKind parse_likelihood(std::string_view name) {
  if (name == "bernoulli-probit") return LikelihoodKind::BernoulliProbit;
  if (name == "poisson-log") return LikelihoodKind::PoissonLog;
  throw std::invalid_argument("unknown likelihood '" + std::string(name) + "'");
}

double clamp_mu(LikelihoodKind kind, double mu) {
  if (kind == LikelihoodKind::BernoulliProbit) return std::clamp(mu, -kProbitMuBound, kProbitMuBound);
  return std::clamp(mu, kPoissonMuLower, kPoissonMuUpper);
}

void validate_responses(const LikelihoodSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double v = y[i];
    const bool ok = spec.kind == LikelihoodKind::BernoulliProbit
                        ? (v == 0.0 || v == 1.0)
                        : (std::isfinite(v) && v >= 0.0 && v == std::floor(v));
    if (!ok) {
      throw std::domain_error("invalid response " + std::to_string(v) + " at row " + std::to_string(i) +
                              " for likelihood " + to_string(spec.kind));
    }
  }
}

double log_density_point(LikelihoodKind kind, double y, double mu) {
  const double m = clamp_mu(kind, mu);
  if (kind == LikelihoodKind::BernoulliProbit) return normal::log_cdf((2.0 * y - 1.0) * m);
  return y * m - std::exp(m) - std::lgamma(y + 1.0);
}

double log_density(const LikelihoodSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& y,
                   const Eigen::Ref<const Eigen::VectorXd>& mu) {
  if (y.size() != mu.size()) throw std::invalid_argument("log_density: length mismatch");
  validate_responses(spec, y);
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) total += log_density_point(spec.kind, y[i], mu[i]);
  return total;
}

LogDensityDerivatives derivatives(const LikelihoodSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& y,
                                  const Eigen::Ref<const Eigen::VectorXd>& mu) {
  if (y.size() != mu.size()) throw std::invalid_argument("derivatives: length mismatch");
  validate_responses(spec, y);
  const Eigen::Index n = y.size();
  LogDensityDerivatives out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  if (spec.kind == LikelihoodKind::PoissonLog) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = clamp_mu(spec.kind, mu[i]);
      const double rate = std::exp(m);
      out.d0[i] = y[i] * m - rate - std::lgamma(y[i] + 1.0);
      out.d1[i] = y[i] - rate;
      out.d2[i] = -rate;
      out.d3[i] = -rate;
    }
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = 2.0 * y[i] - 1.0;
    const double z = s * clamp_mu(spec.kind, mu[i]);
    const auto t = normal::mills_terms(z);
    out.d0[i] = normal::log_cdf(z);
    out.d1[i] = s * t.ratio;
    out.d2[i] = -t.ratio * t.shifted;
    out.d3[i] = s * t.ratio * t.curv;
  }
  return out;
}

}  // namespace lagaboost
