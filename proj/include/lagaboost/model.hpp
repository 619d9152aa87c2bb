#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "lagaboost/laplace.hpp"
#include "lagaboost/latent_structure.hpp"
#include "lagaboost/likelihood.hpp"
#include "lagaboost/tree.hpp"

namespace lagaboost {

/// Converged Laplace quantities at the training data, enough to form
/// predictive moments without refitting.
struct LatentFit {
  LatentStructure structure;
  ThetaVector theta;
  Eigen::VectorXd mode;     ///< b~
  Eigen::VectorXd d1;       ///< d log p / d mu at mu~
  Eigen::VectorXd w_tilde;  ///< -d2 at mu~
  double nll = 0.0;
  bool converged = false;
  double stationarity = 0.0;
};

LatentFit snapshot(const LatentModel& model, const LaplaceState& state);

struct BoostedModel {
  LikelihoodKind likelihood = LikelihoodKind::BernoulliProbit;
  int num_features = 0;
  std::vector<std::string> feature_names;
  double f0 = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  std::optional<LatentFit> latent;  ///< empty for independent boosting

  /// f0 + nu * sum_m tree_m(X), accumulated in fitting order.
  Eigen::VectorXd predict_F(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
  /// Same after only the first `num_trees` trees.
  Eigen::VectorXd predict_F(const Eigen::Ref<const Eigen::MatrixXd>& X, std::size_t num_trees) const;
};

struct LinearModel {
  LikelihoodKind likelihood = LikelihoodKind::BernoulliProbit;
  Eigen::VectorXd beta;  ///< intercept first
  std::optional<LatentFit> latent;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;

  Eigen::VectorXd predict_F(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
};

}  // namespace lagaboost
