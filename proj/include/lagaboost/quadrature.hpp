#pragma once

#include <Eigen/Dense>
#include <functional>

namespace lagaboost {

/// Gauss-Hermite rule for the weight exp(-x^2) on the real line.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Nodes from the Golub-Welsch eigenproblem, polished by Newton iterations on
/// the Hermite recurrence. Rules are cached per size; thread-safe.
const GaussHermiteRule& gauss_hermite(int num_nodes);

/// E[f(Z)] for Z ~ N(mean, var) with the rule recentered at mean and scaled by
/// sqrt(2 var). var = 0 returns f(mean).
double gaussian_expectation(const std::function<double(double)>& f, double mean, double var, int num_nodes);

/// log of the integral of exp(g(u)) du, with nodes centered at the integrand
/// mode `center` and scaled by sqrt(2) * `scale`, where scale^2 is the inverse
/// curvature of -g at the mode. Summation is done in log space.
double adaptive_log_integral(const std::function<double(double)>& g, double center, double scale, int num_nodes);

}  // namespace lagaboost
