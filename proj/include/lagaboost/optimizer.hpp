#pragma once

#include <Eigen/Dense>
#include <functional>

namespace lagaboost {

/// Objective callback: returns f(x) and, when grad is non-null, writes the
/// gradient at x into it.
using SmoothObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct NesterovSettings {
  int max_steps = 10;
  double rel_tol = 1e-6;          ///< stop when |f_new - f_old| / max(|f_old|, 1) < rel_tol
  bool momentum = true;
  double momentum_coef = 0.5;
  double initial_lr = 0.1;
  double max_step = 1.0;          ///< max-norm cap on a single update
  double min_lr = 1e-12;
};

/// Single accelerated steps with persistent momentum and learning rate, so
/// callers can interleave steps on different blocks of parameters.
class NesterovStepper {
 public:
  explicit NesterovStepper(NesterovSettings settings) : settings_(settings), lr_(settings.initial_lr) {}

  struct Outcome {
    bool accepted = false;
    double value = 0.0;
    Eigen::VectorXd grad;
  };

  /// Moves x (with value fx and gradient gx) to a point with f <= fx. An
  /// increase halves the learning rate and drops momentum. On failure x is
  /// left unchanged.
  Outcome step(const SmoothObjective& f, Eigen::VectorXd& x, double fx, const Eigen::VectorXd& gx);

  void reset_momentum() { has_prev_ = false; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  const NesterovSettings& settings() const { return settings_; }

 private:
  NesterovSettings settings_;
  double lr_;
  Eigen::VectorXd prev_;
  bool has_prev_ = false;
};

struct NesterovResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int steps = 0;
  bool converged = false;
  bool stalled = false;           ///< no decrease found even at min_lr; x is best-so-far
};

/// Runs up to max_steps accelerated steps from x0. `lr` carries the learning
/// rate across calls; a non-positive value starts from initial_lr. The last
/// call to f is always at the returned point.
NesterovResult nesterov_minimize(const SmoothObjective& f, const Eigen::VectorXd& x0, const NesterovSettings& settings,
                                 double& lr);

}  // namespace lagaboost
