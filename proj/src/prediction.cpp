#include "lagaboost/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lagaboost/detail/overloaded.hpp"
#include "lagaboost/errors.hpp"
#include "lagaboost/normal.hpp"
#include "lagaboost/quadrature.hpp"

namespace lagaboost {

using detail::overloaded;

namespace {

PredictiveMoments predict_grouped(const LatentFit& fit, const GroupedStructure& g, const Eigen::VectorXd& F_p,
                                  const std::vector<std::int64_t>& labels, const PredictOptions& opts) {
  if (static_cast<Eigen::Index>(labels.size()) != F_p.size()) {
    throw std::invalid_argument("group labels and feature rows differ in length");
  }
  const double s2 = fit.theta.natural(0);
  const Eigen::VectorXd w_sum = g.apply_z_transpose(fit.w_tilde);
  const Eigen::VectorXd zt_d1 = g.apply_z_transpose(fit.d1);

  const Eigen::Index np = F_p.size();
  PredictiveMoments out;
  out.mean = F_p;
  out.var.resize(np);
  std::vector<int> ids(np, -1);
  for (Eigen::Index i = 0; i < np; ++i) {
    const auto id = g.find_label(labels[i]);
    if (!id) {
      ++out.unseen_groups;
      out.var[i] = s2;
      continue;
    }
    const int j = *id;
    ids[i] = j;
    const double w = w_sum[j];
    out.mean[i] += s2 * zt_d1[j];
    out.var[i] = opts.grouped_woodbury ? s2 - s2 * s2 * w / (1.0 + s2 * w) : 1.0 / (w + 1.0 / s2);
  }
  if (opts.full_covariance) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(np, np);
    for (Eigen::Index i = 0; i < np; ++i) {
      for (Eigen::Index k = 0; k < np; ++k) {
        if (labels[i] == labels[k]) cov(i, k) = out.var[i];
      }
    }
    out.cov = std::move(cov);
  }
  return out;
}

PredictiveMoments predict_gp(const LatentFit& fit, const GpStructure& gp, const Eigen::VectorXd& F_p,
                             const Eigen::MatrixXd& locations, const PredictOptions& opts) {
  if (locations.rows() != F_p.size()) throw std::invalid_argument("locations and feature rows differ in length");
  if (locations.cols() != gp.locations().cols()) throw std::invalid_argument("location dimension mismatch");
  const double s2 = fit.theta.natural(0);
  const double rho = fit.theta.natural(1);
  const Eigen::MatrixXd sigma = std::get<Eigen::MatrixXd>(build_sigma(gp, fit.theta));
  const Eigen::VectorXd sqrt_w = fit.w_tilde.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd b = sqrt_w.asDiagonal() * sigma * sqrt_w.asDiagonal();
  b.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  if (llt.info() != Eigen::Success) throw FactorizationError("prediction: Cholesky of I + W^1/2 Sigma W^1/2 failed");

  const Eigen::MatrixXd cross = exponential_cross_covariance(gp.locations(), locations, s2, rho);
  PredictiveMoments out;
  out.mean = F_p + cross.transpose() * fit.d1;
  Eigen::MatrixXd v = sqrt_w.asDiagonal() * cross;
  llt.matrixL().solveInPlace(v);
  out.var = (s2 - v.colwise().squaredNorm().transpose().array()).cwiseMax(0.0).matrix();
  if (opts.full_covariance) {
    Eigen::MatrixXd cov = exponential_cross_covariance(locations, locations, s2, rho);
    cov.noalias() -= v.transpose() * v;
    out.cov = std::move(cov);
  }
  return out;
}

}  // namespace

PredictiveMoments predict_latent(const LatentFit* fit, const Eigen::VectorXd& F_p, const StructureQuery& query,
                                 const PredictOptions& options) {
  if (!fit) {
    PredictiveMoments out;
    out.mean = F_p;
    out.var = Eigen::VectorXd::Zero(F_p.size());
    if (options.full_covariance) out.cov = Eigen::MatrixXd::Zero(F_p.size(), F_p.size());
    return out;
  }
  if (!fit->converged) throw NumericalError("prediction from a latent fit whose mode search did not converge");
  return std::visit(
      overloaded{
          [&](const GroupedStructure& g) {
            const auto* labels = std::get_if<std::vector<std::int64_t>>(&query);
            if (!labels) throw std::invalid_argument("grouped model needs group labels for prediction");
            return predict_grouped(*fit, g, F_p, *labels, options);
          },
          [&](const GpStructure& gp) {
            const auto* locs = std::get_if<Eigen::MatrixXd>(&query);
            if (!locs) throw std::invalid_argument("GP model needs locations for prediction");
            return predict_gp(*fit, gp, F_p, *locs, options);
          },
      },
      fit->structure);
}

PredictiveMoments predict_latent(const BoostedModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                 const StructureQuery& query, const PredictOptions& options) {
  return predict_latent(model.latent ? &*model.latent : nullptr, model.predict_F(X), query, options);
}

PredictiveMoments predict_latent(const LinearModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                 const StructureQuery& query, const PredictOptions& options) {
  return predict_latent(model.latent ? &*model.latent : nullptr, model.predict_F(X), query, options);
}

namespace {

/// log of the integral of p(y | u) N(u; mean, var) by Gauss-Hermite centered
/// at the integrand mode and scaled by its curvature.
double log_marginal_quadrature(LikelihoodKind kind, double y, double mean, double var, int num_nodes) {
  // the integrand is log-concave, so bounded Newton steps reach the mode
  const LikelihoodSpec spec{kind, {}};
  Eigen::VectorXd yy(1), uu(1);
  yy[0] = y;
  double u = mean;
  for (int it = 0; it < 100; ++it) {
    uu[0] = u;
    const auto d = derivatives(spec, yy, uu);
    const double g1 = d.d1[0] - (u - mean) / var;
    const double step = std::clamp(g1 / (-d.d2[0] + 1.0 / var), -5.0, 5.0);
    u += step;
    if (std::abs(step) < 1e-12 * (1.0 + std::abs(u))) break;
  }
  uu[0] = u;
  const double curvature = -derivatives(spec, yy, uu).d2[0] + 1.0 / var;
  const double log_norm = -0.5 * std::log(2.0 * M_PI * var);
  auto g = [&](double v) { return log_density_point(kind, y, v) - 0.5 * (v - mean) * (v - mean) / var + log_norm; };
  return adaptive_log_integral(g, u, 1.0 / std::sqrt(curvature), num_nodes);
}

}  // namespace

double predict_response(LikelihoodKind kind, double mean, double var, int num_nodes, ResponseMethod method) {
  if (num_nodes < 1) throw std::invalid_argument("quadrature needs at least one node");
  if (var < 0.0) throw std::domain_error("negative predictive variance");
  if (method == ResponseMethod::Auto) {
    method = kind == LikelihoodKind::BernoulliProbit ? ResponseMethod::ClosedForm : ResponseMethod::Quadrature;
  }
  if (kind == LikelihoodKind::BernoulliProbit) {
    if (method == ResponseMethod::ClosedForm) return normal::cdf(mean / std::sqrt(1.0 + var));
    if (var == 0.0) return normal::cdf(mean);
    // P(y = 1) as the marginal density of a one
    return std::exp(log_marginal_quadrature(kind, 1.0, mean, var, num_nodes));
  }
  if (method == ResponseMethod::ClosedForm) return std::exp(mean + 0.5 * var);
  if (var == 0.0) return std::exp(mean);
  // exp(u) N(u; mean, var) peaks at mean + var with curvature 1 / var
  const double log_norm = -0.5 * std::log(2.0 * M_PI * var);
  auto g = [&](double u) { return u - 0.5 * (u - mean) * (u - mean) / var + log_norm; };
  return std::exp(adaptive_log_integral(g, mean + var, std::sqrt(var), num_nodes));
}

Eigen::VectorXd predict_response(LikelihoodKind kind, const PredictiveMoments& moments, int num_nodes,
                                 ResponseMethod method) {
  Eigen::VectorXd out(moments.mean.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = predict_response(kind, moments.mean[i], moments.var[i], num_nodes, method);
  }
  return out;
}

double predictive_log_density(LikelihoodKind kind, double y, double mean, double var, int num_nodes) {
  if (num_nodes < 1) throw std::invalid_argument("quadrature needs at least one node");
  if (var < 0.0) throw std::domain_error("negative predictive variance");
  if (kind == LikelihoodKind::BernoulliProbit) {
    const double s = y > 0.5 ? 1.0 : -1.0;
    return normal::log_cdf(s * mean / std::sqrt(1.0 + var));
  }
  if (var == 0.0) return log_density_point(kind, y, mean);
  return log_marginal_quadrature(kind, y, mean, var, num_nodes);
}

Eigen::VectorXd predictive_log_density(LikelihoodKind kind, const Eigen::VectorXd& y, const PredictiveMoments& moments,
                                       int num_nodes) {
  if (y.size() != moments.mean.size()) throw std::invalid_argument("response and prediction lengths differ");
  Eigen::VectorXd out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    out[i] = predictive_log_density(kind, y[i], moments.mean[i], moments.var[i], num_nodes);
  }
  return out;
}

}  // namespace lagaboost
