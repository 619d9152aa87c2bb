#include "lagaboost/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lagaboost/detail/overloaded.hpp"
#include "lagaboost/errors.hpp"
#include "lagaboost/normal.hpp"
#include "lagaboost/rng.hpp"

namespace lagaboost {

using detail::overloaded;

void validate(const BoostConfig& c) {
  if (c.iterations < 0) throw std::invalid_argument("number of boosting iterations must be >= 0");
  if (!(c.learning_rate > 0.0 && c.learning_rate <= 1.0)) throw std::invalid_argument("learning rate must be in (0, 1]");
  if (c.tree.max_depth < 0) throw std::invalid_argument("max depth must be >= 0");
  if (c.tree.min_samples_leaf < 1) throw std::invalid_argument("min samples per leaf must be >= 1");
  if (c.hyper.max_steps < 1) throw std::invalid_argument("hyperparameter step budget must be >= 1");
}

// ---------------------------------------------------------------------------
// Hyperparameter step

namespace {

class ThetaObjective {
 public:
  ThetaObjective(const std::vector<ThetaTerm>& terms, std::vector<LaplaceState> warm, const NewtonSettings& newton)
      : terms_(terms), states_(std::move(warm)), newton_(newton) {
    states_.resize(terms_.size());
    has_state_.assign(terms_.size(), false);
    for (std::size_t i = 0; i < terms_.size(); ++i) has_state_[i] = states_[i].mode.size() > 0;
  }

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const ThetaVector theta(x);
    std::vector<LaplaceState> next(terms_.size());
    double value = 0.0;
    if (grad) *grad = Eigen::VectorXd::Zero(x.size());
    try {
      for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& t = terms_[i];
        next[i] = find_mode(*t.model, theta, t.F, has_state_[i] ? &states_[i] : nullptr, newton_);
        value += next[i].nll;
        if (grad) *grad += grad_theta(*t.model, next[i]);
      }
    } catch (const std::domain_error&) {
      return std::numeric_limits<double>::infinity();
    } catch (const FactorizationError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(value)) return value;
    states_ = std::move(next);
    has_state_.assign(terms_.size(), true);
    last_x_ = x;
    return value;
  }

  const Eigen::VectorXd& last_x() const { return last_x_; }
  std::vector<LaplaceState>& states() { return states_; }

 private:
  const std::vector<ThetaTerm>& terms_;
  std::vector<LaplaceState> states_;
  std::vector<bool> has_state_;
  NewtonSettings newton_;
  Eigen::VectorXd last_x_;
};

}  // namespace

ThetaFit optimize_theta(const std::vector<ThetaTerm>& terms, const ThetaVector& theta_init,
                        const std::vector<LaplaceState>& warm, const NesterovSettings& settings, double& lr,
                        const NewtonSettings& newton) {
  if (terms.empty()) throw std::invalid_argument("optimize_theta: no terms");
  ThetaObjective objective(terms, warm, newton);
  SmoothObjective f = [&objective](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return objective(x, g); };
  const NesterovResult res = nesterov_minimize(f, theta_init.log_values, settings, lr);
  if (objective.last_x() != res.x) {
    Eigen::VectorXd unused;
    objective(res.x, &unused);
  }
  ThetaFit out;
  out.theta = ThetaVector(res.x);
  out.states = std::move(objective.states());
  out.value = res.value;
  out.steps = res.steps;
  out.converged = res.converged;
  out.stalled = res.stalled;
  return out;
}

// ---------------------------------------------------------------------------
// Initial constant

namespace {

/// Root of an increasing function h on [lo, hi] given h and an estimate of
/// its slope. Newton steps that leave the current bracket are replaced by
/// bisection; a root outside the interval yields the nearer endpoint.
template <typename Fn>
double safeguarded_root(Fn&& h_and_slope, double guess, double lo, double hi) {
  double c = std::clamp(guess, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const auto [h, slope] = h_and_slope(c);
    if (h == 0.0) return c;
    if (h < 0.0) {
      lo = c;
    } else {
      hi = c;
    }
    double next = c - h / slope;
    if (!(slope > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - c) < 1e-10 * (1.0 + std::abs(c))) return next;
    c = next;
  }
  return c;
}

double likelihood_guess(const LikelihoodSpec& lik, const Eigen::VectorXd& y) {
  if (y.size() == 0) return 0.0;
  const double mean = y.mean();
  if (lik.kind == LikelihoodKind::BernoulliProbit) {
    return normal::quantile(std::clamp(mean, 1e-6, 1.0 - 1e-6));
  }
  return std::log(std::max(mean, 1e-6));
}

}  // namespace

double initial_constant(const LatentModel& model, const ThetaVector& theta, const NewtonSettings& newton,
                        LaplaceState* state_out) {
  const Eigen::Index n = model.num_obs();
  LaplaceState warm;
  bool has_warm = false;
  auto h_at = [&](double c) {
    LaplaceState st = find_mode(model, theta, Eigen::VectorXd::Constant(n, c), has_warm ? &warm : nullptr, newton);
    const double h = grad_F(model, st).sum();
    warm = std::move(st);
    has_warm = true;
    return h;
  };
  const double delta = 1e-4;
  auto h_and_slope = [&](double c) {
    const double up = h_at(c + delta);
    const double down = h_at(c - delta);
    const double h = h_at(c);
    return std::pair<double, double>{h, (up - down) / (2.0 * delta)};
  };
  const double guess = model.y().size() == n && n > 0 ? likelihood_guess(model.likelihood(), model.y()) : 0.0;
  const double c = safeguarded_root(h_and_slope, guess, -10.0, 10.0);
  if (state_out) {
    *state_out = find_mode(model, theta, Eigen::VectorXd::Constant(n, c), has_warm ? &warm : nullptr, newton);
  }
  return c;
}

double initial_constant_independent(const LikelihoodSpec& likelihood, const Eigen::VectorXd& y) {
  validate_responses(likelihood, y);
  const Eigen::Index n = y.size();
  auto h_and_slope = [&](double c) {
    const auto d = derivatives(likelihood, y, Eigen::VectorXd::Constant(n, c));
    return std::pair<double, double>{-d.d1.sum(), -d.d2.sum()};
  };
  return safeguarded_root(h_and_slope, likelihood_guess(likelihood, y), -10.0, 10.0);
}

// ---------------------------------------------------------------------------
// LaGaBoost

namespace {

void check_data(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw std::invalid_argument("feature rows and responses differ in length");
  if (y.size() == 0) throw std::invalid_argument("empty training data");
  if (!X.allFinite()) throw std::invalid_argument("features must be finite");
}

}  // namespace

BoostedModel fit_lagaboost(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXd& y,
                           const LikelihoodSpec& likelihood, const LatentStructure& structure,
                           const BoostConfig& config, FitTrace* trace, const IterationObserver& observer) {
  validate(config);
  check_data(X, y);
  const LatentModel model(likelihood, y, structure);
  ThetaVector theta = config.theta0 ? *config.theta0 : default_theta(structure);
  if (theta.size() != num_cov_params(structure)) throw std::invalid_argument("theta0 has wrong length");

  FitTrace local;
  FitTrace& tr = trace ? *trace : local;
  tr = FitTrace{};

  BoostedModel out;
  out.likelihood = likelihood.kind;
  out.num_features = static_cast<int>(X.cols());
  out.learning_rate = config.learning_rate;

  LaplaceState state;
  out.f0 = initial_constant(model, theta, config.newton, &state);
  Eigen::VectorXd F = Eigen::VectorXd::Constant(X.rows(), out.f0);
  tr.nll.push_back(state.nll);
  tr.theta.push_back(theta.natural());
  tr.newton_iterations += state.newton_iters;
  if (observer) observer(IterationInfo{0, nullptr, &F, &state, state.nll, 0});

  NesterovSettings hyper = config.hyper;
  if (config.full_hyper_convergence) hyper.max_steps = 1000;
  double lr = -1.0;
  std::vector<ThetaTerm> terms(1);
  terms[0].model = &model;

  out.trees.reserve(config.iterations);
  for (int m = 1; m <= config.iterations; ++m) {
    int steps = 0;
    if (config.optimize_theta) {
      terms[0].F = F;
      ThetaFit tf = optimize_theta(terms, theta, {state}, hyper, lr, config.newton);
      theta = tf.theta;
      state = std::move(tf.states[0]);
      steps = tf.steps;
      ++tr.hyper_opt_calls;
      tr.hyper_steps += steps;
    }
    if (!state.converged) {
      throw NumericalError("Laplace mode search did not converge at boosting iteration " + std::to_string(m));
    }
    const Eigen::VectorXd g = grad_F(model, state);
    if (!g.allFinite()) throw NumericalError("non-finite gradient at boosting iteration " + std::to_string(m));
    out.trees.push_back(fit_tree(X, -g, config.tree));
    F += config.learning_rate * out.trees.back().predict(X);
    state = find_mode(model, theta, F, &state, config.newton);
    tr.newton_iterations += state.newton_iters;
    tr.nll.push_back(state.nll);
    tr.theta.push_back(theta.natural());
    if (observer) observer(IterationInfo{m, &out.trees.back(), &F, &state, state.nll, steps});
  }
  if (!state.converged) throw NumericalError("Laplace mode search did not converge after the final iteration");
  out.latent = snapshot(model, state);
  tr.final_F = F;
  return out;
}

// ---------------------------------------------------------------------------
// Folds and the out-of-sample variant

std::vector<int> make_folds(Eigen::Index n, int k, std::uint64_t seed, const std::vector<int>* groups) {
  if (k < 2) throw std::invalid_argument("need at least two folds");
  if (n < k) throw std::invalid_argument("fewer rows than folds: a fold would be empty");
  Rng rng(seed, 0x5eed'f01dULL);
  auto shuffle = [&](std::vector<int>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
  };
  std::vector<int> fold(n, 0);
  if (groups) {
    if (static_cast<Eigen::Index>(groups->size()) != n) throw std::invalid_argument("group index length mismatch");
    const int m = groups->empty() ? 0 : *std::max_element(groups->begin(), groups->end()) + 1;
    std::vector<std::vector<int>> members(m);
    for (Eigen::Index i = 0; i < n; ++i) members[(*groups)[i]].push_back(static_cast<int>(i));
    std::size_t counter = 0;
    for (auto& rows : members) {
      shuffle(rows);
      for (int r : rows) fold[r] = static_cast<int>(counter++ % k);
    }
  } else {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order);
    for (Eigen::Index p = 0; p < n; ++p) fold[order[p]] = static_cast<int>(p % k);
  }
  return fold;
}

LatentStructure subset_structure(const LatentStructure& structure, const std::vector<int>& rows) {
  return std::visit(overloaded{
                        [&](const GroupedStructure& g) -> LatentStructure {
                          std::vector<std::int64_t> labels(rows.size());
                          for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = g.labels()[g.group_index()[rows[i]]];
                          return GroupedStructure::from_labels(labels);
                        },
                        [&](const GpStructure& gp) -> LatentStructure {
                          Eigen::MatrixXd locs(rows.size(), gp.locations().cols());
                          for (std::size_t i = 0; i < rows.size(); ++i) locs.row(i) = gp.locations().row(rows[i]);
                          return GpStructure(std::move(locs), gp.jitter());
                        },
                    },
                    structure);
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<int>& rows) {
  Eigen::MatrixXd out(rows.size(), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<int>& rows) {
  Eigen::VectorXd out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i]];
  return out;
}

}  // namespace

ThetaFit validation_theta(const std::vector<ThetaTerm>& terms, const ThetaVector& theta_init,
                          const NesterovSettings& settings, const NewtonSettings& newton) {
  double lr = -1.0;
  return optimize_theta(terms, theta_init, {}, settings, lr, newton);
}

BoostedModel fit_lagaboost_oos(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXd& y,
                               const LikelihoodSpec& likelihood, const LatentStructure& structure,
                               const BoostConfig& config, const OosOptions& options, FitTrace* trace,
                               OosDiagnostics* diagnostics) {
  validate(config);
  check_data(X, y);
  const Eigen::Index n = y.size();
  std::vector<int> folds = options.fold_of_row;
  int k = options.folds;
  if (folds.empty()) {
    const auto* g = std::get_if<GroupedStructure>(&structure);
    folds = make_folds(n, k, config.seed, g ? &g->group_index() : nullptr);
  } else {
    if (static_cast<Eigen::Index>(folds.size()) != n) throw std::invalid_argument("fold assignment length mismatch");
    k = *std::max_element(folds.begin(), folds.end()) + 1;
  }
  if (k < 2) throw std::invalid_argument("need at least two folds");
  std::vector<std::vector<int>> val_rows(k), train_rows(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int f = folds[i];
    if (f < 0) throw std::invalid_argument("negative fold id");
    for (int v = 0; v < k; ++v) (v == f ? val_rows[v] : train_rows[v]).push_back(static_cast<int>(i));
  }
  for (int v = 0; v < k; ++v) {
    if (val_rows[v].empty()) throw std::invalid_argument("fold " + std::to_string(v) + " is empty");
  }

  OosDiagnostics diag;
  diag.fold_of_row = folds;
  std::vector<LatentModel> val_models;
  val_models.reserve(k);
  std::vector<ThetaTerm> terms(k);
  Eigen::VectorXd mean_log = Eigen::VectorXd::Zero(num_cov_params(structure));
  for (int v = 0; v < k; ++v) {
    const auto& tr_rows = train_rows[v];
    const BoostedModel fold_model = fit_lagaboost(take_rows(X, tr_rows), take(y, tr_rows), likelihood,
                                                  subset_structure(structure, tr_rows), config);
    diag.theta_folds.push_back(fold_model.latent->theta);
    mean_log += fold_model.latent->theta.log_values / k;
    val_models.emplace_back(likelihood, take(y, val_rows[v]), subset_structure(structure, val_rows[v]));
    terms[v].F = fold_model.predict_F(take_rows(X, val_rows[v]));
  }
  for (int v = 0; v < k; ++v) terms[v].model = &val_models[v];

  const ThetaFit vt = validation_theta(terms, ThetaVector(mean_log), options.validation_steps, config.newton);
  diag.theta_validation = vt.theta;
  diag.validation_steps = vt.steps;
  diag.validation_converged = vt.converged;

  BoostConfig frozen = config;
  frozen.optimize_theta = false;
  frozen.theta0 = vt.theta;
  BoostedModel out = fit_lagaboost(X, y, likelihood, structure, frozen, trace);
  if (diagnostics) *diagnostics = std::move(diag);
  return out;
}

// ---------------------------------------------------------------------------
// Linear baseline

LinearModel fit_linear_baseline(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXd& y,
                                const LikelihoodSpec& likelihood, const LatentStructure& structure,
                                const LinearConfig& config, FitTrace* trace) {
  check_data(X, y);
  if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  const LatentModel model(likelihood, y, structure);
  const Eigen::Index n = y.size();
  const Eigen::Index p = X.cols();
  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = X;

  FitTrace local;
  FitTrace& tr = trace ? *trace : local;
  tr = FitTrace{};

  ThetaVector theta = config.theta0 ? *config.theta0 : default_theta(structure);
  LaplaceState state;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  beta[0] = initial_constant(model, theta, config.newton, &state);
  tr.nll.push_back(state.nll);

  // Both callbacks leave `state` at the last successfully evaluated point,
  // which the steppers guarantee is the accepted one.
  LaplaceState probe;
  bool probe_ok = false;
  SmoothObjective f_beta = [&](const Eigen::VectorXd& b, Eigen::VectorXd* grad) {
    try {
      probe = find_mode(model, theta, design * b, &state, config.newton);
    } catch (const std::exception&) {
      probe_ok = false;
      return std::numeric_limits<double>::infinity();
    }
    probe_ok = true;
    if (grad) *grad = design.transpose() * grad_F(model, probe);
    return probe.nll;
  };
  SmoothObjective f_theta = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    try {
      probe = find_mode(model, ThetaVector(x), design * beta, &state, config.newton);
    } catch (const std::exception&) {
      probe_ok = false;
      return std::numeric_limits<double>::infinity();
    }
    probe_ok = true;
    if (grad) *grad = grad_theta(model, probe);
    return probe.nll;
  };

  NesterovStepper beta_stepper(config.beta_steps);
  NesterovStepper theta_stepper(config.hyper);
  LinearModel out;
  out.likelihood = likelihood.kind;
  for (int it = 1; it <= config.max_iterations; ++it) {
    out.iterations = it;
    const double before = state.nll;

    const Eigen::VectorXd g_beta = design.transpose() * grad_F(model, state);
    const auto rb = beta_stepper.step(f_beta, beta, state.nll, g_beta);
    if (rb.accepted && probe_ok) state = probe;

    bool theta_moved = false;
    if (config.optimize_theta) {
      Eigen::VectorXd x = theta.log_values;
      const Eigen::VectorXd g_theta = grad_theta(model, state);
      const auto rt = theta_stepper.step(f_theta, x, state.nll, g_theta);
      if (rt.accepted && probe_ok) {
        theta = ThetaVector(x);
        state = probe;
        theta_moved = true;
      }
    }
    tr.nll.push_back(state.nll);
    tr.theta.push_back(theta.natural());
    if (!rb.accepted && !theta_moved) {
      out.stalled = true;
      break;
    }
    if (std::abs(before - state.nll) / std::max(std::abs(before), 1.0) < config.rel_tol) {
      out.converged = true;
      break;
    }
  }
  out.beta = beta;
  out.latent = snapshot(model, state);
  tr.final_F = design * beta;
  return out;
}

// ---------------------------------------------------------------------------
// Independent boosting

BoostedModel fit_independent_boosting(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::VectorXd& y,
                                      const LikelihoodSpec& likelihood, const BoostConfig& config, FitTrace* trace,
                                      const IterationObserver& observer) {
  validate(config);
  check_data(X, y);
  FitTrace local;
  FitTrace& tr = trace ? *trace : local;
  tr = FitTrace{};

  BoostedModel out;
  out.likelihood = likelihood.kind;
  out.num_features = static_cast<int>(X.cols());
  out.learning_rate = config.learning_rate;
  out.f0 = initial_constant_independent(likelihood, y);
  Eigen::VectorXd F = Eigen::VectorXd::Constant(y.size(), out.f0);
  auto d = derivatives(likelihood, y, F);
  tr.nll.push_back(-d.d0.sum());
  if (observer) observer(IterationInfo{0, nullptr, &F, nullptr, tr.nll.back(), 0});
  out.trees.reserve(config.iterations);
  for (int m = 1; m <= config.iterations; ++m) {
    if (!d.d1.allFinite()) throw NumericalError("non-finite gradient at boosting iteration " + std::to_string(m));
    out.trees.push_back(fit_tree(X, d.d1, config.tree));
    F += config.learning_rate * out.trees.back().predict(X);
    d = derivatives(likelihood, y, F);
    tr.nll.push_back(-d.d0.sum());
    if (observer) observer(IterationInfo{m, &out.trees.back(), &F, nullptr, tr.nll.back(), 0});
  }
  tr.final_F = F;
  return out;
}

}  // namespace lagaboost
