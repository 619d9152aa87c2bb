#include "lagaboost/laplace.hpp"

#include <cmath>
#include <stdexcept>

#include "lagaboost/detail/overloaded.hpp"
#include "lagaboost/errors.hpp"

namespace lagaboost {

using detail::overloaded;

LatentModel::LatentModel(LikelihoodSpec likelihood, Eigen::VectorXd y, LatentStructure structure)
    : likelihood_(std::move(likelihood)), y_(std::move(y)), structure_(std::move(structure)), n_(y_.size()) {
  if (lagaboost::num_obs(structure_) != n_) {
    throw std::invalid_argument("response length does not match latent structure");
  }
  validate_responses(likelihood_, y_);
  loglik_ = [spec = likelihood_, y = y_](const Eigen::VectorXd& mu) { return derivatives(spec, y, mu); };
}

LatentModel::LatentModel(LogLikelihoodFn loglik, Eigen::Index num_obs, LatentStructure structure)
    : structure_(std::move(structure)), n_(num_obs), loglik_(std::move(loglik)) {
  if (lagaboost::num_obs(structure_) != n_) {
    throw std::invalid_argument("observation count does not match latent structure");
  }
  y_ = Eigen::VectorXd::Zero(n_);
}

namespace {

struct Iterate {
  Eigen::VectorXd b;
  Eigen::VectorXd alpha;
  Eigen::VectorXd mu;
  LogDensityDerivatives der;
  double objective = 0.0;
};

// Near the mode a Newton step gains less than the rounding error of the
// objective, so the halving comparison becomes noise. Such steps are taken in
// full; `gain` is the first-order increase grad' step.
bool below_rounding(const Iterate& cur, double gain) {
  const double scale = cur.der.d0.cwiseAbs().sum() + 0.5 * std::abs(cur.b.dot(cur.alpha)) + 1.0;
  return gain >= 0.0 && gain <= 1e-13 * scale;
}

void require_finite(const LogDensityDerivatives& d) {
  if (!d.d0.allFinite() || !d.d1.allFinite() || !d.d2.allFinite()) {
    throw NumericalError("non-finite log-likelihood derivatives during mode search");
  }
}

GroupedFactor grouped_factor(const GroupedStructure& g, double sigma2, const Eigen::VectorXd& w) {
  GroupedFactor f;
  f.sigma2 = sigma2;
  f.w_sum = g.apply_z_transpose(w);
  f.precision = f.w_sum.array() + 1.0 / sigma2;
  return f;
}

GpFactor gp_factor(std::shared_ptr<const Eigen::MatrixXd> sigma, const Eigen::VectorXd& w) {
  GpFactor f;
  f.sigma = std::move(sigma);
  f.sqrt_w = w.cwiseMax(0.0).cwiseSqrt();
  const Eigen::Index n = w.size();
  Eigen::MatrixXd b = f.sqrt_w.asDiagonal() * (*f.sigma) * f.sqrt_w.asDiagonal();
  b.diagonal().array() += 1.0;
  f.llt.compute(b);
  if (f.llt.info() != Eigen::Success) {
    // B has eigenvalues >= 1 in exact arithmetic; failure means corrupted input.
    throw FactorizationError("Cholesky of I + W^1/2 Sigma W^1/2 failed (n = " + std::to_string(n) + ")");
  }
  return f;
}

LaplaceState find_mode_grouped(const LatentModel& model, const GroupedStructure& g, const ThetaVector& theta,
                               const Eigen::VectorXd& F, const LaplaceState* warm, const NewtonSettings& opts) {
  const double sigma2 = theta.natural(0);
  const Eigen::Index m = g.num_effects();

  auto evaluate = [&](Eigen::VectorXd b) {
    Iterate it;
    it.b = std::move(b);
    it.alpha = it.b / sigma2;
    it.mu = F + g.apply_z(it.b);
    it.der = model.evaluate(it.mu);
    require_finite(it.der);
    it.objective = it.der.d0.sum() - 0.5 * it.b.dot(it.alpha);
    return it;
  };

  Iterate cur = evaluate(warm && warm->mode.size() == m ? warm->mode : Eigen::VectorXd::Zero(m));
  LaplaceState st;
  int iters = 0;
  for (; iters < opts.max_iterations;) {
    ++iters;
    const Eigen::VectorXd w = -cur.der.d2;
    const Eigen::VectorXd precision = g.apply_z_transpose(w).array() + 1.0 / sigma2;
    const Eigen::VectorXd grad = g.apply_z_transpose(cur.der.d1) - cur.alpha;
    const Eigen::VectorXd step = grad.cwiseQuotient(precision);
    const bool tiny = below_rounding(cur, grad.dot(step));

    double t = 1.0;
    bool accepted = false;
    Iterate next;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
      next = evaluate(cur.b + t * step);
      if (next.objective >= cur.objective || tiny) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      st.converged = false;
      break;
    }
    const double change = next.objective - cur.objective;
    const double step_norm = (t * step).cwiseAbs().maxCoeff();
    cur = std::move(next);
    if (change < opts.objective_tol || step_norm < opts.step_tol) {
      st.converged = true;
      break;
    }
  }

  st.theta = theta;
  st.F = F;
  st.mode = std::move(cur.b);
  st.alpha = std::move(cur.alpha);
  st.mu_tilde = std::move(cur.mu);
  st.derivs = std::move(cur.der);
  st.w_tilde = -st.derivs.d2;
  st.objective = cur.objective;
  st.newton_iters = iters;
  st.factor = grouped_factor(g, sigma2, st.w_tilde);
  if (!st.converged) st.converged = st.stationarity_residual(model) <= 1e-6;
  st.nll = laplace_nll(model, st);
  return st;
}

LaplaceState find_mode_gp(const LatentModel& model, const GpStructure& gp, const ThetaVector& theta,
                          const Eigen::VectorXd& F, const LaplaceState* warm, const NewtonSettings& opts) {
  const Eigen::Index n = gp.num_obs();
  std::shared_ptr<const Eigen::MatrixXd> sigma;
  if (warm && warm->theta == theta && std::holds_alternative<GpFactor>(warm->factor)) {
    sigma = std::get<GpFactor>(warm->factor).sigma;
  }
  if (!sigma || sigma->rows() != n) {
    sigma = std::make_shared<const Eigen::MatrixXd>(std::get<Eigen::MatrixXd>(build_sigma(gp, theta)));
  }
  const Eigen::MatrixXd& K = *sigma;

  auto evaluate = [&](Eigen::VectorXd alpha) {
    Iterate it;
    it.alpha = std::move(alpha);
    it.b.noalias() = K * it.alpha;
    it.mu = F + it.b;
    it.der = model.evaluate(it.mu);
    require_finite(it.der);
    it.objective = it.der.d0.sum() - 0.5 * it.alpha.dot(it.b);
    return it;
  };

  Iterate cur = evaluate(warm && warm->alpha.size() == n ? warm->alpha : Eigen::VectorXd::Zero(n));
  LaplaceState st;
  int iters = 0;
  for (; iters < opts.max_iterations;) {
    ++iters;
    const Eigen::VectorXd w = -cur.der.d2;
    GpFactor f = gp_factor(sigma, w);
    // Newton update in alpha = Sigma^{-1} b, avoiding Sigma^{-1}:
    //   rhs = W b + d1,  alpha_new = rhs - W^1/2 B^{-1} W^1/2 Sigma rhs
    const Eigen::VectorXd rhs = w.cwiseProduct(cur.b) + cur.der.d1;
    const Eigen::VectorXd k_rhs = K * rhs;
    const Eigen::VectorXd alpha_full =
        rhs - f.sqrt_w.cwiseProduct(f.llt.solve(f.sqrt_w.cwiseProduct(k_rhs)));
    const Eigen::VectorXd dalpha = alpha_full - cur.alpha;
    const bool tiny = below_rounding(cur, (cur.der.d1 - cur.alpha).dot(K * dalpha));

    double t = 1.0;
    bool accepted = false;
    Iterate next;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
      next = evaluate(cur.alpha + t * dalpha);
      if (next.objective >= cur.objective || tiny) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      st.converged = false;
      break;
    }
    const double change = next.objective - cur.objective;
    const double step_norm = (next.b - cur.b).cwiseAbs().maxCoeff();
    cur = std::move(next);
    if (change < opts.objective_tol || step_norm < opts.step_tol) {
      st.converged = true;
      break;
    }
  }

  st.theta = theta;
  st.F = F;
  st.mode = std::move(cur.b);
  st.alpha = std::move(cur.alpha);
  st.mu_tilde = std::move(cur.mu);
  st.derivs = std::move(cur.der);
  st.w_tilde = -st.derivs.d2;
  st.objective = cur.objective;
  st.newton_iters = iters;
  st.factor = gp_factor(sigma, st.w_tilde);
  if (!st.converged) st.converged = st.stationarity_residual(model) <= 1e-6;
  st.nll = laplace_nll(model, st);
  return st;
}

}  // namespace

double LaplaceState::stationarity_residual(const LatentModel& model) const {
  const Eigen::VectorXd zt_d1 = apply_z_transpose(model.structure(), derivs.d1);
  return (zt_d1 - alpha).cwiseAbs().maxCoeff();
}

LaplaceState find_mode(const LatentModel& model, const ThetaVector& theta, const Eigen::VectorXd& F,
                       const LaplaceState* warm, const NewtonSettings& settings) {
  if (F.size() != model.num_obs()) throw std::invalid_argument("find_mode: F has wrong length");
  if (!F.allFinite()) throw std::invalid_argument("find_mode: F must be finite");
  if (theta.size() != num_cov_params(model.structure())) throw std::invalid_argument("find_mode: theta has wrong length");
  return std::visit(overloaded{
                        [&](const GroupedStructure& g) { return find_mode_grouped(model, g, theta, F, warm, settings); },
                        [&](const GpStructure& gp) { return find_mode_gp(model, gp, theta, F, warm, settings); },
                    },
                    model.structure());
}

double laplace_nll(const LatentModel&, const LaplaceState& state) {
  const double quad = 0.5 * state.mode.dot(state.alpha);
  const double loglik = state.derivs.d0.sum();
  const double half_logdet = std::visit(
      overloaded{
          // det(Sigma Z'WZ + I) = prod_j (1 + sigma2 w_j)
          [](const GroupedFactor& f) { return 0.5 * (f.sigma2 * f.w_sum.array()).log1p().sum(); },
          // det(Sigma W + I) = det(B)
          [](const GpFactor& f) {
            return f.llt.matrixLLT().diagonal().array().log().sum();
          },
      },
      state.factor);
  return -loglik + quad + half_logdet;
}

Eigen::VectorXd posterior_variance_diag(const LaplaceState& state) {
  return std::visit(overloaded{
                        [](const GroupedFactor& f) -> Eigen::VectorXd { return f.precision.cwiseInverse(); },
                        [](const GpFactor& f) -> Eigen::VectorXd {
                          // diag(Sigma - Sigma W^1/2 B^{-1} W^1/2 Sigma) via V = L^{-1} W^1/2 Sigma
                          Eigen::MatrixXd v = f.sqrt_w.asDiagonal() * (*f.sigma);
                          f.llt.matrixL().solveInPlace(v);
                          return f.sigma->diagonal() - v.colwise().squaredNorm().transpose();
                        },
                    },
                    state.factor);
}

Eigen::VectorXd grad_F(const LatentModel& model, const LaplaceState& state) {
  const auto& d = state.derivs;
  const Eigen::VectorXd& w = state.w_tilde;
  return std::visit(
      overloaded{
          [&](const GroupedFactor& f) -> Eigen::VectorXd {
            const auto& g = std::get<GroupedStructure>(model.structure());
            const auto& idx = g.group_index();
            // c_j = dL/db~_j = 1/2 sum_{i in j} (-d3_i) / precision_j
            const Eigen::VectorXd c = 0.5 * g.apply_z_transpose(-d.d3).cwiseQuotient(f.precision);
            Eigen::VectorXd out(model.num_obs());
            for (Eigen::Index i = 0; i < out.size(); ++i) {
              const double h = f.precision[idx[i]];
              out[i] = -d.d1[i] + 0.5 * (-d.d3[i]) / h - c[idx[i]] * w[i] / h;
            }
            return out;
          },
          [&](const GpFactor& f) -> Eigen::VectorXd {
            const Eigen::MatrixXd& K = *f.sigma;
            const Eigen::VectorXd h_inv_diag = posterior_variance_diag(state);
            const Eigen::VectorXd c = 0.5 * h_inv_diag.cwiseProduct(-d.d3);
            // H^{-1} c = Sigma c - Sigma W^1/2 B^{-1} W^1/2 Sigma c
            const Eigen::VectorXd kc = K * c;
            const Eigen::VectorXd inner = f.sqrt_w.cwiseProduct(f.llt.solve(f.sqrt_w.cwiseProduct(kc)));
            const Eigen::VectorXd h_inv_c = kc - K * inner;
            return -d.d1 + c - w.cwiseProduct(h_inv_c);
          },
      },
      state.factor);
}

Eigen::VectorXd grad_theta(const LatentModel& model, const LaplaceState& state) {
  const auto& d = state.derivs;
  return std::visit(
      overloaded{
          [&](const GroupedFactor& f) -> Eigen::VectorXd {
            const auto& g = std::get<GroupedStructure>(model.structure());
            const double s2 = f.sigma2;
            const Eigen::VectorXd c = 0.5 * g.apply_z_transpose(-d.d3).cwiseQuotient(f.precision);
            const Eigen::VectorXd zt_d1 = g.apply_z_transpose(d.d1);
            // dSigma/dsigma2 = I
            const double explicit_quad = -0.5 * state.mode.squaredNorm() / (s2 * s2);
            // (Z'WZ + Sigma^{-1})^{-1} Sigma^{-1} dSigma Z'WZ is diagonal here
            const double trace = 0.5 * (f.w_sum.array() / (s2 * f.precision.array())).sum();
            // db~/dsigma2 = H^{-1} Sigma^{-1} dSigma Z' d1
            const double implicit = (c.array() * zt_d1.array() / (f.precision.array() * s2)).sum();
            Eigen::VectorXd out(1);
            out[0] = s2 * (explicit_quad + trace + implicit);
            return out;
          },
          [&](const GpFactor& f) -> Eigen::VectorXd {
            const auto& gp = std::get<GpStructure>(model.structure());
            const Eigen::MatrixXd& K = *f.sigma;
            const Eigen::Index n = K.rows();
            // R = W^1/2 B^{-1} W^1/2 = (Sigma + W^{-1})^{-1}
            Eigen::MatrixXd l_inv = Eigen::MatrixXd::Identity(n, n);
            f.llt.matrixL().solveInPlace(l_inv);
            Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
            r.selfadjointView<Eigen::Lower>().rankUpdate(l_inv.transpose());
            r.triangularView<Eigen::StrictlyUpper>() = r.transpose();
            r = f.sqrt_w.asDiagonal() * r * f.sqrt_w.asDiagonal();

            // diag(H^{-1}) = diag(Sigma) - diag(Sigma R Sigma)
            Eigen::MatrixXd v = l_inv.triangularView<Eigen::Lower>() * (f.sqrt_w.asDiagonal() * K);
            const Eigen::VectorXd h_inv_diag = K.diagonal() - v.colwise().squaredNorm().transpose();
            const Eigen::VectorXd c = 0.5 * h_inv_diag.cwiseProduct(-d.d3);

            const double rho = state.theta.natural(1);
            Eigen::VectorXd out(2);
            for (Eigen::Index k = 0; k < 2; ++k) {
              // log-scale derivative matrices: sigma2 dSigma/dsigma2 = Sigma, rho dSigma/drho = Sigma o D / rho
              Eigen::MatrixXd dk;
              if (k == 0) {
                dk = K;
              } else {
                dk = (K.array() * gp.distances().array() / rho).matrix();
              }
              const double explicit_quad = -0.5 * state.alpha.dot(dk * state.alpha);
              const double trace = 0.5 * (r.array() * dk.array()).sum();
              const Eigen::VectorXd vk = dk * d.d1;
              const Eigen::VectorXd db = vk - K * (r * vk);
              out[k] = explicit_quad + trace + c.dot(db);
            }
            return out;
          },
      },
      state.factor);
}

}  // namespace lagaboost
