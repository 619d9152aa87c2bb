#include "lagaboost/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace lagaboost {

namespace {

// Orthonormal Hermite recurrence: returns p_n(x) and p_{n-1}(x) for the
// normalized polynomials with respect to exp(-x^2).
void hermite_normalized(int n, double x, double& pn, double& pn1) {
  double p0 = std::pow(M_PI, -0.25);
  double p1 = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double p2 = p1;
    p1 = p0;
    p0 = x * std::sqrt(2.0 / k) * p1 - std::sqrt((k - 1.0) / k) * p2;
  }
  pn = p0;
  pn1 = p1;
}

GaussHermiteRule compute_rule(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussHermiteRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = rule.nodes[i];
    double pn = 0.0, pn1 = 0.0;
    for (int it = 0; it < 3; ++it) {
      hermite_normalized(n, x, pn, pn1);
      const double dp = std::sqrt(2.0 * n) * pn1;
      if (dp == 0.0) break;
      x -= pn / dp;
    }
    hermite_normalized(n, x, pn, pn1);
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / (n * pn1 * pn1);
  }
  // symmetrize to remove rounding asymmetry
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int num_nodes) {
  if (num_nodes < 1) throw std::invalid_argument("Gauss-Hermite rule needs at least one node");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[num_nodes];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(compute_rule(num_nodes));
  return *slot;
}

double gaussian_expectation(const std::function<double(double)>& f, double mean, double var, int num_nodes) {
  const auto& rule = gauss_hermite(num_nodes);
  if (var < 0.0) throw std::domain_error("gaussian_expectation: negative variance");
  if (var == 0.0) return f(mean);
  const double scale = std::sqrt(2.0 * var);
  double sum = 0.0;
  for (int k = 0; k < num_nodes; ++k) sum += rule.weights[k] * f(mean + scale * rule.nodes[k]);
  return sum / std::sqrt(M_PI);
}

double adaptive_log_integral(const std::function<double(double)>& g, double center, double scale, int num_nodes) {
  const auto& rule = gauss_hermite(num_nodes);
  if (!(scale > 0.0)) throw std::domain_error("adaptive_log_integral: scale must be positive");
  const double s = std::sqrt(2.0) * scale;
  Eigen::VectorXd terms(num_nodes);
  for (int k = 0; k < num_nodes; ++k) {
    const double x = rule.nodes[k];
    terms[k] = std::log(rule.weights[k]) + x * x + g(center + s * x);
  }
  const double top = terms.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((terms.array() - top).exp().sum()) + std::log(s);
}

}  // namespace lagaboost
