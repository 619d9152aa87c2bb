#include "lagaboost/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace lagaboost {

LatentFit snapshot(const LatentModel& model, const LaplaceState& state) {
  LatentFit fit;
  fit.structure = model.structure();
  fit.theta = state.theta;
  fit.mode = state.mode;
  fit.d1 = state.derivs.d1;
  fit.w_tilde = state.w_tilde;
  fit.nll = state.nll;
  fit.converged = state.converged;
  fit.stationarity = state.stationarity_residual(model);
  return fit;
}

Eigen::VectorXd BoostedModel::predict_F(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  return predict_F(X, trees.size());
}

Eigen::VectorXd BoostedModel::predict_F(const Eigen::Ref<const Eigen::MatrixXd>& X, std::size_t num_trees) const {
  if (X.cols() != num_features) {
    throw std::invalid_argument("expected " + std::to_string(num_features) + " feature columns, got " +
                                std::to_string(X.cols()));
  }
  Eigen::VectorXd F = Eigen::VectorXd::Constant(X.rows(), f0);
  const std::size_t used = std::min(num_trees, trees.size());
  for (std::size_t m = 0; m < used; ++m) F += learning_rate * trees[m].predict(X);
  return F;
}

Eigen::VectorXd LinearModel::predict_F(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  if (X.cols() + 1 != beta.size()) throw std::invalid_argument("linear model: feature count mismatch");
  return (X * beta.tail(X.cols())).array() + beta[0];
}

}  // namespace lagaboost
