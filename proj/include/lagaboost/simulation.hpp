#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lagaboost/likelihood.hpp"
#include "lagaboost/rng.hpp"

namespace lagaboost {

enum class Scenario { GroupedBinary, SpatialBinary, GroupedPoisson, SpatialPoisson };

std::string to_string(Scenario s);
/// "grouped-binary", "spatial-binary", "grouped-poisson", "spatial-poisson".
Scenario parse_scenario(std::string_view name);
bool is_grouped(Scenario s);
LikelihoodKind likelihood_of(Scenario s);

struct SimConfig {
  Scenario scenario = Scenario::GroupedBinary;
  int n = 5000;
  int samples_per_group = 10;
  double sigma2 = 1.0;
  double rho = 0.1;
  int runs = 10;
  std::uint64_t seed = 1;
};

/// Defaults per scenario: grouped n=5000 with 10 per group, spatial n=500 with
/// rho=0.1; sigma2 = 1 for binary and 0.2 for Poisson responses.
SimConfig default_sim_config(Scenario s);
void validate(const SimConfig& c);

/// Number of groups implied by n and samples per group.
int num_groups(const SimConfig& c);

/// Variance of F matched to the latent variance of the scenario.
double target_function_variance(Scenario s);

/// Uncalibrated term 2 x1 + x2^2 + 4 1{x3 > 0} + 2 log|x1| x3.
double raw_function(const Eigen::Ref<const Eigen::RowVectorXd>& x);

struct FunctionCalibration {
  double offset = 0.0;  ///< C1
  double scale = 1.0;   ///< C2
  double target_variance = 1.0;
  int draws = 0;
};

/// Offset and scale making F mean ~0 and variance ~target, from 1e6 fixed-seed
/// standard normal draws. Cached per target; thread-safe.
const FunctionCalibration& calibration(double target_variance);

double fixed_function_row(const Eigen::Ref<const Eigen::RowVectorXd>& x, const FunctionCalibration& cal);
Eigen::VectorXd fixed_function(const Eigen::Ref<const Eigen::MatrixXd>& X, const FunctionCalibration& cal);

/// n x 9 standard normal features; rows with x1 == 0 exactly are redrawn.
Eigen::MatrixXd draw_features(Eigen::Index n, Rng& rng);

/// One joint draw from N(0, sigma2 exp(-D / rho)) over all locations.
Eigen::VectorXd draw_gp_effects(const Eigen::Ref<const Eigen::MatrixXd>& locations, double sigma2, double rho,
                                Rng& rng);

struct SimSet {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd F;       ///< true F(X)
  Eigen::VectorXd effect;  ///< true (Z b)_i
  std::vector<std::int64_t> groups;
  Eigen::MatrixXd locations;
};

struct SimData {
  SimSet train;
  SimSet interp;
  SimSet extrap;
  FunctionCalibration calibration;
};

/// Training, interpolation, and extrapolation sets for replicate `replicate`
/// of the configuration; identical inputs give identical data.
SimData gen_dataset(const SimConfig& config, std::uint64_t replicate);

}  // namespace lagaboost
