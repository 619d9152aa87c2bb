#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "lagaboost/likelihood.hpp"
#include "lagaboost/model.hpp"

namespace lagaboost {

/// Structure side of a prediction request: nothing (no latent effects), group
/// labels (possibly unseen), or locations.
using StructureQuery = std::variant<std::monostate, std::vector<std::int64_t>, Eigen::MatrixXd>;

struct PredictiveMoments {
  Eigen::VectorXd mean;  ///< predictive latent mean
  Eigen::VectorXd var;   ///< diagonal of the predictive latent covariance
  std::optional<Eigen::MatrixXd> cov;
  int unseen_groups = 0; ///< rows whose group label was not in training
};

struct PredictOptions {
  bool full_covariance = false;
  /// Grouped variance via sigma2 - sigma2^2 w / (1 + sigma2 w) instead of the
  /// inverse posterior precision. Both are exact; kept for cross-checks.
  bool grouped_woodbury = false;
};

/// Predictive moments of mu_p = F_p + Z_p b_p given the training fit.
/// `fit` may be null (independent model): then var = 0.
PredictiveMoments predict_latent(const LatentFit* fit, const Eigen::VectorXd& F_p, const StructureQuery& query,
                                 const PredictOptions& options = {});

PredictiveMoments predict_latent(const BoostedModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                 const StructureQuery& query, const PredictOptions& options = {});
PredictiveMoments predict_latent(const LinearModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                 const StructureQuery& query, const PredictOptions& options = {});

enum class ResponseMethod { Auto, ClosedForm, Quadrature };

/// Predictive mean response E[y_p | y]: a probability for BernoulliProbit, a
/// count mean for PoissonLog. Auto uses the closed form for the probit and
/// quadrature for the Poisson. Quadrature nodes are centered at the mode of
/// the integrand and scaled by its curvature.
double predict_response(LikelihoodKind kind, double mean, double var, int num_nodes = 30,
                        ResponseMethod method = ResponseMethod::Auto);
Eigen::VectorXd predict_response(LikelihoodKind kind, const PredictiveMoments& moments, int num_nodes = 30,
                                 ResponseMethod method = ResponseMethod::Auto);

/// log p(y_p | y) for each prediction point: closed form for the probit,
/// adaptive Gauss-Hermite quadrature centered at the integrand mode otherwise.
double predictive_log_density(LikelihoodKind kind, double y, double mean, double var, int num_nodes = 30);
Eigen::VectorXd predictive_log_density(LikelihoodKind kind, const Eigen::VectorXd& y, const PredictiveMoments& moments,
                                       int num_nodes = 30);

}  // namespace lagaboost
