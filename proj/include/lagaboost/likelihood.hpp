#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

namespace lagaboost {

enum class LikelihoodKind { BernoulliProbit, PoissonLog };

std::string to_string(LikelihoodKind kind);
/// Parses "bernoulli-probit" / "poisson-log"; throws std::invalid_argument otherwise.
LikelihoodKind parse_likelihood(std::string_view name);

/// Response distribution p(y_i | mu_i, xi). Both implemented kinds have no
/// auxiliary parameters; `aux_params` is kept so the optimizer interface can
/// carry an (empty) xi block.
struct LikelihoodSpec {
  LikelihoodKind kind = LikelihoodKind::BernoulliProbit;
  std::vector<double> aux_params;
};

/// Per-observation log-density and its first three derivatives in mu.
struct LogDensityDerivatives {
  Eigen::VectorXd d0;
  Eigen::VectorXd d1;
  Eigen::VectorXd d2;
  Eigen::VectorXd d3;
};

/// Bounds applied to mu before any evaluation. Value and derivative paths
/// both use the clamped mu.
inline constexpr double kProbitMuBound = 30.0;
inline constexpr double kPoissonMuLower = -700.0;
inline constexpr double kPoissonMuUpper = 30.0;

double clamp_mu(LikelihoodKind kind, double mu);

/// Throws std::domain_error if any response is invalid for the kind
/// ({0,1} for BernoulliProbit, non-negative integers for PoissonLog).
void validate_responses(const LikelihoodSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Sum of per-observation log densities.
double log_density(const LikelihoodSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& y,
                   const Eigen::Ref<const Eigen::VectorXd>& mu);

/// Per-observation log density and derivatives. Responses are validated.
LogDensityDerivatives derivatives(const LikelihoodSpec& spec,
                                  const Eigen::Ref<const Eigen::VectorXd>& y,
                                  const Eigen::Ref<const Eigen::VectorXd>& mu);

/// Single-observation log density without validation; used in inner loops
/// such as quadrature.
double log_density_point(LikelihoodKind kind, double y, double mu);

}  // namespace lagaboost
