#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lagaboost/laplace.hpp"
#include "lagaboost/latent_structure.hpp"
#include "lagaboost/likelihood.hpp"
#include "lagaboost/model.hpp"
#include "lagaboost/optimizer.hpp"
#include "lagaboost/tree.hpp"

namespace lagaboost {

struct BoostConfig {
  int iterations = 100;
  double learning_rate = 0.1;
  TreeParams tree;
  std::optional<ThetaVector> theta0;  ///< default_theta(structure) when empty
  NesterovSettings hyper;             ///< per-iteration hyperparameter step budget
  bool optimize_theta = true;
  bool full_hyper_convergence = false;  ///< run the hyperparameter step to convergence (max 1000 steps)
  NewtonSettings newton;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument on out-of-range values.
void validate(const BoostConfig& config);

struct IterationInfo {
  int iteration = 0;                  ///< 0 is the initial constant
  const RegressionTree* tree = nullptr;
  const Eigen::VectorXd* F = nullptr; ///< training F after this iteration
  const LaplaceState* state = nullptr;///< null for independent boosting
  double nll = 0.0;                   ///< training risk after this iteration
  int hyper_steps = 0;
};

using IterationObserver = std::function<void(const IterationInfo&)>;

struct FitTrace {
  std::vector<double> nll;            ///< index 0: after the initial constant
  std::vector<Eigen::VectorXd> theta; ///< natural scale, per iteration
  int hyper_opt_calls = 0;
  int hyper_steps = 0;
  int newton_iterations = 0;
  Eigen::VectorXd final_F;
};

/// Minimizes the summed Laplace risk of several models over a shared theta.
struct ThetaTerm {
  const LatentModel* model = nullptr;
  Eigen::VectorXd F;
};

struct ThetaFit {
  ThetaVector theta;
  std::vector<LaplaceState> states;  ///< one per term, at theta
  double value = 0.0;
  int steps = 0;
  bool converged = false;
  bool stalled = false;
};

/// Nesterov steps on log-theta. `warm` (one per term, may be empty) seeds
/// both theta and the mode search; `lr` persists the learning rate.
ThetaFit optimize_theta(const std::vector<ThetaTerm>& terms, const ThetaVector& theta_init,
                        const std::vector<LaplaceState>& warm, const NesterovSettings& settings, double& lr,
                        const NewtonSettings& newton = {});

/// argmin_c L^LA(y, c 1, theta): safeguarded Newton on the derivative with
/// bisection fallback on [-10, 10]. `state` receives the mode at the optimum.
double initial_constant(const LatentModel& model, const ThetaVector& theta, const NewtonSettings& newton,
                        LaplaceState* state = nullptr);

/// argmin_c -log p(y | c 1) under the same safeguards.
double initial_constant_independent(const LikelihoodSpec& likelihood, const Eigen::VectorXd& y);

BoostedModel fit_lagaboost(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXd& y,
                           const LikelihoodSpec& likelihood, const LatentStructure& structure,
                           const BoostConfig& config, FitTrace* trace = nullptr,
                           const IterationObserver& observer = {});

/// Fold id per row. With `groups`, rows of each group are dealt round-robin so
/// per-group fold counts differ by at most one. Throws if a fold would be empty.
std::vector<int> make_folds(Eigen::Index n, int k, std::uint64_t seed, const std::vector<int>* groups = nullptr);

/// Restriction of a structure to a subset of rows (group labels preserved).
LatentStructure subset_structure(const LatentStructure& structure, const std::vector<int>& rows);

struct OosOptions {
  int folds = 4;
  std::vector<int> fold_of_row;  ///< explicit assignment; drawn by make_folds when empty
  NesterovSettings validation_steps{500, 1e-10, true, 0.5, 0.1, 1.0, 1e-12};
};

struct OosDiagnostics {
  std::vector<int> fold_of_row;
  ThetaVector theta_validation;
  std::vector<ThetaVector> theta_folds;
  int validation_steps = 0;
  bool validation_converged = false;
};

/// Step (3) alone: theta minimizing the summed Laplace risk of the validation
/// folds given out-of-fold predictions of F.
ThetaFit validation_theta(const std::vector<ThetaTerm>& terms, const ThetaVector& theta_init,
                          const NesterovSettings& settings, const NewtonSettings& newton = {});

BoostedModel fit_lagaboost_oos(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXd& y,
                               const LikelihoodSpec& likelihood, const LatentStructure& structure,
                               const BoostConfig& config, const OosOptions& options = {}, FitTrace* trace = nullptr,
                               OosDiagnostics* diagnostics = nullptr);

struct LinearConfig {
  int max_iterations = 1000;
  double rel_tol = 1e-6;
  NesterovSettings beta_steps;
  NesterovSettings hyper;
  bool optimize_theta = true;
  std::optional<ThetaVector> theta0;
  NewtonSettings newton;
};

/// Linear latent Gaussian model F = beta_0 + X beta with alternating
/// accelerated steps on beta (gradient X^T dL/dF) and log-theta.
LinearModel fit_linear_baseline(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXd& y,
                                const LikelihoodSpec& likelihood, const LatentStructure& structure,
                                const LinearConfig& config = {}, FitTrace* trace = nullptr);

/// Gradient boosting on -log p(y | F) without latent effects. Callers append
/// group ids or locations to X themselves.
BoostedModel fit_independent_boosting(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXd& y,
                                      const LikelihoodSpec& likelihood, const BoostConfig& config,
                                      FitTrace* trace = nullptr, const IterationObserver& observer = {});

}  // namespace lagaboost
