#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace lagaboost {

/// Share of rows where (p >= 0.5) disagrees with y.
double error_rate(const Eigen::VectorXd& y, const Eigen::VectorXd& prob);

/// Summed binary log loss; probabilities are clipped to [1e-15, 1 - 1e-15].
double log_loss(const Eigen::VectorXd& y, const Eigen::VectorXd& prob);

/// Area under the ROC curve via the Mann-Whitney statistic with average ranks
/// for ties. Empty when only one class is present.
std::optional<double> auc(const Eigen::VectorXd& y, const Eigen::VectorXd& score);

double rmse(const Eigen::VectorXd& y, const Eigen::VectorXd& pred);

struct TTestResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Two-sided paired t-test of mean(a - b) = 0. Zero variance of the
/// differences gives p = 1 for a zero mean and p = 0 otherwise.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct ParamError {
  double rmse = 0.0;
  double bias = 0.0;
};

/// RMSE and bias of estimates against the true value.
ParamError parameter_error(const std::vector<double>& estimates, double truth);

double mean(const std::vector<double>& v);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev(const std::vector<double>& v);

}  // namespace lagaboost
