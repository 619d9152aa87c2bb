#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lagaboost/boosting.hpp"
#include "lagaboost/prediction.hpp"
#include "lagaboost/simulation.hpp"

namespace lagaboost {

enum class Method { LaGaBoost, Linear, Independent, LaGaBoostOOS };

std::string to_string(Method m);
/// Column label in reports, e.g. LinearME / LinearGP, LogitBoost / PoisBoost.
std::string display_name(Method m, Scenario s);

struct BoostTuning {
  int iterations = 100;
  double learning_rate = 0.1;
  int max_depth = 5;
  int min_leaf = 10;

  bool operator==(const BoostTuning&) const = default;
};

BoostConfig to_config(const BoostTuning& t, std::uint64_t seed = 0);

/// Tuning used by the harness when no grid search is requested. Chosen from a
/// reduced offline run of tune_simulated (see README).
BoostTuning frozen_tuning(Scenario s, Method m);

struct ExperimentConfig {
  SimConfig sim;
  std::optional<BoostTuning> lagaboost_tuning;    ///< frozen_tuning when empty
  std::optional<BoostTuning> independent_tuning;  ///< frozen_tuning when empty
  std::vector<Method> methods{Method::LaGaBoost, Method::Linear, Method::Independent};
  int oos_folds = 4;
  int threads = 1;
  int quadrature_nodes = 30;
};

struct MethodMetrics {
  bool ok = false;
  std::string failure;
  double error = 0.0, error_ext = 0.0;  ///< binary only
  std::optional<double> auc, auc_ext;   ///< binary only
  double rmse = 0.0, rmse_ext = 0.0;    ///< Poisson only
  double negll = 0.0, negll_ext = 0.0;
  Eigen::VectorXd theta;                ///< natural scale; empty without latent effects
  double seconds = 0.0;
  bool converged = true;
  double stationarity = 0.0;
  double train_nll = 0.0;
};

struct ReplicateResult {
  std::uint64_t replicate = 0;
  std::vector<MethodMetrics> methods;  ///< aligned with ExperimentConfig::methods
};

struct SummaryRow {
  std::string method;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
  std::optional<double> p_value;
  int count = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  FunctionCalibration calibration;
  std::vector<ReplicateResult> replicates;
  std::vector<SummaryRow> summary;
  int failures = 0;  ///< method fits that threw; excluded from the summary
  double seconds = 0.0;

  /// Per-replicate values of one metric for one method (failed fits skipped).
  std::vector<double> values(Method m, std::string_view metric) const;
  const SummaryRow* find(Method m, std::string_view metric) const;
};

/// Fits and scores every configured method on replicate r.
ReplicateResult run_replicate(const ExperimentConfig& config, std::uint64_t r);

/// Metric value by report name ("Error", "NegLL_ext", "RMSE", "AUC", ...).
std::optional<double> metric_value(const MethodMetrics& m, std::string_view metric);

/// Metric names shown for a scenario, in table order.
std::vector<std::string> metric_names(Scenario s);

using ReplicateCallback = std::function<void(const ReplicateResult&)>;

ExperimentReport run_experiment(const ExperimentConfig& config, const ReplicateCallback& on_replicate = {});
void summarize(ExperimentReport& report);

/// method,metric,mean,sd,p_value,count
void write_report_csv(std::ostream& os, const ExperimentReport& report);
/// Table with one column per method and mean / (sd) / [p-val] rows.
std::string format_report_table(const ExperimentReport& report);

enum class SweepAxis { SamplesPerGroup, Rho };

std::string to_string(SweepAxis a);
SweepAxis parse_axis(std::string_view name);  ///< "samples-per-group" or "rho"
std::vector<double> sweep_values(SweepAxis a);

struct SweepPoint {
  double axis_value = 0.0;
  double mean_error_lagaboost = 0.0;
  double mean_error_independent = 0.0;
  double rel_decrease = 0.0;  ///< mean over runs of (err_indep - err_lagaboost) / err_indep
  ExperimentReport report;
};

/// Relative decrease of LaGaBoost error vs independent boosting; 0 when the
/// errors are equal (including both zero).
double relative_decrease(double err_independent, double err_lagaboost);

/// Runs LaGaBoost and independent boosting per axis value on interpolation
/// test sets. The base scenario must be binary; the axis picks grouped or
/// spatial data.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                                  const std::function<void(const SweepPoint&)>& on_point = {});

/// axis_value,method,mean_error,rel_decrease (one row per axis value).
void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points);

struct TuningGrid {
  int max_iterations = 1000;
  std::vector<double> learning_rates{0.1, 0.05, 0.01};
  std::vector<int> max_depths{1, 2, 5, 10};
  std::vector<int> min_leaves{1, 10, 100};

  std::size_t size() const {
    return static_cast<std::size_t>(max_iterations) * learning_rates.size() * max_depths.size() * min_leaves.size();
  }
};

struct TuningCell {
  BoostTuning tuning;  ///< iterations = best M along the path
  double score = 0.0;  ///< mean validation NegLL at that M
};

struct TuningResult {
  BoostTuning best;
  double best_score = 0.0;
  std::vector<TuningCell> cells;  ///< one per (learning rate, depth, min leaf)
};

/// A training/validation pair for path scoring.
struct ValidationSplit {
  Eigen::MatrixXd X_train;
  Eigen::VectorXd y_train;
  LatentStructure structure_train;
  Eigen::MatrixXd X_val;
  Eigen::VectorXd y_val;
  StructureQuery query_val;
};

/// Validation NegLL after every iteration 1..M of one fitting path.
std::vector<double> score_path(const ValidationSplit& split, const LikelihoodSpec& likelihood, Method method,
                               const BoostConfig& config, int quadrature_nodes = 30);

/// Grid search minimizing mean validation NegLL over the splits; M is picked
/// along each path without refitting. A grid of size one is returned as is.
TuningResult tune_grid(const std::vector<ValidationSplit>& splits, const LikelihoodSpec& likelihood, Method method,
                       const TuningGrid& grid, int threads = 1);

/// k-fold splits of one training set (stratified by group for grouped data).
std::vector<ValidationSplit> cv_splits(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                       const LatentStructure& structure, int k, std::uint64_t seed);

/// The simulated-sets protocol: `sets` extra datasets, each scored on the
/// union of its interpolation and extrapolation test sets.
std::vector<ValidationSplit> simulated_splits(const SimConfig& config, Method method, int sets);

/// Feature matrix seen by a method: independent boosting gets group ids or
/// locations appended.
Eigen::MatrixXd method_features(Method method, const SimSet& set);
LatentStructure training_structure(const SimSet& set);
StructureQuery structure_query(const SimSet& set);

/// Runs fn(i) for i in [0, n) on up to `threads` threads.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace lagaboost
