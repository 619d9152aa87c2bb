#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <variant>

#include "lagaboost/latent_structure.hpp"
#include "lagaboost/likelihood.hpp"

namespace lagaboost {

/// Evaluates per-observation log-likelihood derivatives at mu.
using LogLikelihoodFn = std::function<LogDensityDerivatives(const Eigen::VectorXd& mu)>;

/// Responses, their likelihood, and the latent Gaussian structure linking
/// them. Responses are validated once at construction.
class LatentModel {
 public:
  LatentModel(LikelihoodSpec likelihood, Eigen::VectorXd y, LatentStructure structure);

  /// Model with an arbitrary pointwise log-likelihood; used for synthetic
  /// checks (e.g. Gaussian or flat likelihoods).
  LatentModel(LogLikelihoodFn loglik, Eigen::Index num_obs, LatentStructure structure);

  const LikelihoodSpec& likelihood() const { return likelihood_; }
  const Eigen::VectorXd& y() const { return y_; }
  const LatentStructure& structure() const { return structure_; }
  Eigen::Index num_obs() const { return n_; }
  Eigen::Index num_effects() const { return lagaboost::num_effects(structure_); }

  LogDensityDerivatives evaluate(const Eigen::VectorXd& mu) const { return loglik_(mu); }

 private:
  LikelihoodSpec likelihood_;
  Eigen::VectorXd y_;
  LatentStructure structure_;
  Eigen::Index n_ = 0;
  LogLikelihoodFn loglik_;
};

struct NewtonSettings {
  double objective_tol = 1e-8;  ///< absolute change of the penalized log-likelihood
  double step_tol = 1e-8;       ///< max-norm of the accepted step in b
  int max_iterations = 100;
  int max_halvings = 40;
};

/// Grouped path: Z^T W Z + Sigma^{-1} is diagonal with entries
/// precision_j = sum_{i in j} W_i + 1 / sigma2.
struct GroupedFactor {
  double sigma2 = 1.0;
  Eigen::VectorXd w_sum;
  Eigen::VectorXd precision;
};

/// Woodbury path: Cholesky of B = I + W^{1/2} Sigma W^{1/2}.
struct GpFactor {
  std::shared_ptr<const Eigen::MatrixXd> sigma;
  Eigen::VectorXd sqrt_w;
  Eigen::LLT<Eigen::MatrixXd> llt;
};

struct LaplaceState {
  ThetaVector theta;
  Eigen::VectorXd F;
  Eigen::VectorXd mode;      ///< b~ (length m)
  Eigen::VectorXd alpha;     ///< Sigma^{-1} b~
  Eigen::VectorXd mu_tilde;  ///< F + Z b~
  LogDensityDerivatives derivs;
  Eigen::VectorXd w_tilde;   ///< -d2 at mu_tilde
  std::variant<GroupedFactor, GpFactor> factor;
  double objective = 0.0;    ///< log p(y | mu~) - b~' Sigma^{-1} b~ / 2
  double nll = 0.0;          ///< Laplace-approximated negative log-marginal likelihood
  bool converged = false;
  int newton_iters = 0;

  /// max_j |(Z^T d1 - Sigma^{-1} b~)_j|
  double stationarity_residual(const LatentModel& model) const;
};

/// Newton's method with step halving for the mode of
/// log p(y | F + Z b) - b' Sigma^{-1} b / 2. A warm state supplies the
/// starting point (b for grouped effects, Sigma^{-1} b for the GP so that a
/// change of theta keeps the iterate well defined).
LaplaceState find_mode(const LatentModel& model, const ThetaVector& theta, const Eigen::VectorXd& F,
                       const LaplaceState* warm = nullptr, const NewtonSettings& settings = {});

/// L^LA = -log p(y | mu~) + b~' Sigma^{-1} b~ / 2 + log det(Sigma Z^T W~ Z + I) / 2.
double laplace_nll(const LatentModel& model, const LaplaceState& state);

/// dL^LA / dF (length n), including the implicit dependence through b~.
Eigen::VectorXd grad_F(const LatentModel& model, const LaplaceState& state);

/// dL^LA / d log(theta_k) (length q).
Eigen::VectorXd grad_theta(const LatentModel& model, const LaplaceState& state);

/// Posterior covariance diagonal of b given y: diag((Z^T W~ Z + Sigma^{-1})^{-1}).
Eigen::VectorXd posterior_variance_diag(const LaplaceState& state);

}  // namespace lagaboost
