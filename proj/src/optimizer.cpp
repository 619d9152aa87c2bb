#include "lagaboost/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "lagaboost/errors.hpp"

namespace lagaboost {

namespace {

Eigen::VectorXd capped(Eigen::VectorXd step, double cap) {
  const double norm = step.cwiseAbs().maxCoeff();
  if (norm > cap) step *= cap / norm;
  return step;
}

}  // namespace

NesterovStepper::Outcome NesterovStepper::step(const SmoothObjective& f, Eigen::VectorXd& x, double fx,
                                               const Eigen::VectorXd& gx) {
  Outcome out;
  Eigen::VectorXd y = x;
  Eigen::VectorXd grad_y = gx;
  if (settings_.momentum && has_prev_ && prev_.size() == x.size() && prev_ != x) {
    y = x + settings_.momentum_coef * (x - prev_);
    f(y, &grad_y);
    if (!grad_y.allFinite()) {
      y = x;
      grad_y = gx;
    }
  }

  Eigen::VectorXd x_new;
  Eigen::VectorXd grad;
  bool restarted = false;
  while (lr_ >= settings_.min_lr) {
    x_new = y - capped(lr_ * grad_y, settings_.max_step);
    const double value = f(x_new, &grad);
    if (std::isfinite(value) && value <= fx && grad.allFinite()) {
      out.accepted = true;
      out.value = value;
      out.grad = std::move(grad);
      break;
    }
    lr_ *= 0.5;
    if (!restarted && y != x) {
      y = x;
      grad_y = gx;
      restarted = true;
    }
  }
  if (!out.accepted) {
    has_prev_ = false;
    return out;
  }
  if (restarted) {
    has_prev_ = false;
  } else {
    prev_ = x;
    has_prev_ = true;
  }
  x = std::move(x_new);
  return out;
}

NesterovResult nesterov_minimize(const SmoothObjective& f, const Eigen::VectorXd& x0, const NesterovSettings& settings,
                                 double& lr) {
  if (settings.max_steps < 1) throw std::invalid_argument("nesterov_minimize: max_steps must be >= 1");
  NesterovStepper stepper(settings);
  if (lr > 0.0) stepper.set_learning_rate(lr);

  NesterovResult res;
  res.x = x0;
  Eigen::VectorXd grad;
  res.value = f(res.x, &grad);
  if (!std::isfinite(res.value) || !grad.allFinite()) throw NumericalError("non-finite objective at optimizer start");

  for (int step = 1; step <= settings.max_steps; ++step) {
    res.steps = step;
    if (grad.cwiseAbs().maxCoeff() == 0.0) {
      res.converged = true;
      break;
    }
    const double before = res.value;
    auto out = stepper.step(f, res.x, res.value, grad);
    if (!out.accepted) {
      res.stalled = true;
      f(res.x, &grad);
      break;
    }
    res.value = out.value;
    grad = std::move(out.grad);
    if (std::abs(res.value - before) / std::max(std::abs(before), 1.0) < settings.rel_tol) {
      res.converged = true;
      break;
    }
  }
  lr = stepper.learning_rate();
  return res;
}

}  // namespace lagaboost
