// Acceptance suite: one PASS/FAIL line per criterion on stdout, details on
// stderr. Optional arguments select criteria, e.g. `acceptance P1 P3`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "instances.hpp"
#include "lagaboost/boosting.hpp"
#include "lagaboost/experiment.hpp"
#include "lagaboost/metrics.hpp"
#include "lagaboost/prediction.hpp"
#include "lagaboost/rng.hpp"
#include "oracles.hpp"

using namespace lagaboost;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr auto kProbit = LikelihoodKind::BernoulliProbit;
constexpr auto kPoisson = LikelihoodKind::PoissonLog;

// P1
constexpr int kGradInstances = 20;
constexpr double kFdStep = 1e-5;
constexpr double kGradTol = 1e-4;
constexpr double kGradFloor = 1e-3;  // relative error denominator floor
constexpr double kGradSeconds = 60.0;
// P2
constexpr double kDualTol = 1e-8;
constexpr double kDualFloor = 1.0;
// P3
constexpr int kQuadNodes = 30;
constexpr double kQuadTol = 1e-8;
// predictive variance range: twice the largest simulated latent variance
constexpr double kQuadVarLo = 0.01, kQuadVarHi = 2.0;
// P4
constexpr double kGroupedErrLo = 0.22, kGroupedErrHi = 0.26;
constexpr int kMinWins = 9;
constexpr double kGroupedSeconds = 15 * 60.0;
// P5
constexpr double kSpatialErrTarget = 0.3085, kSpatialErrTol = 0.03;
constexpr double kSpatialSeconds = 30 * 60.0;
// P6
constexpr double kRmseGroupedTarget = 1.465, kRmseSpatialTarget = 1.415, kRmseTol = 0.15;
// P7
constexpr int kSweepRuns = 10;
constexpr int kMaxInversions = 1;
// P8
constexpr double kStationarityTol = 1e-6;
constexpr double kMonotoneTol = 1e-10;
constexpr int kMonotoneIterations = 100;
constexpr double kMonotoneRate = 0.01;
// P9
constexpr double kOosErrSlack = 0.02;

constexpr int kReplicates = 10;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

NewtonSettings tight_newton() {
  NewtonSettings s;
  s.objective_tol = -1.0;
  s.step_tol = 1e-14;
  s.max_iterations = 200;
  return s;
}

int worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  double worst_F = 0.0, worst_theta = 0.0;
  int failed_modes = 0;
  Rng rng(2024);
  auto check = [&](const oracle::Instance& in, LikelihoodKind kind) {
    const LatentModel model({kind, {}}, in.y, in.structure);
    const NewtonSettings ns = tight_newton();
    const auto st = find_mode(model, in.theta, in.F, nullptr, ns);
    if (!st.converged) ++failed_modes;
    auto nll_F = [&](const VectorXd& F) { return find_mode(model, in.theta, F, &st, ns).nll; };
    auto nll_theta = [&](const VectorXd& log_theta) { return find_mode(model, ThetaVector(log_theta), in.F, &st, ns).nll; };
    const VectorXd fd_F = oracle::fd_gradient(nll_F, in.F, kFdStep);
    const VectorXd fd_theta = oracle::fd_gradient(nll_theta, in.theta.log_values, kFdStep);
    worst_F = std::max(worst_F, oracle::max_rel_err(grad_F(model, st), fd_F, kGradFloor));
    worst_theta = std::max(worst_theta, oracle::max_rel_err(grad_theta(model, st), fd_theta, kGradFloor));
  };
  for (int i = 0; i < kGradInstances; ++i) {
    const LikelihoodKind kind = i % 2 == 0 ? kProbit : kPoisson;
    const double sigma2 = 0.3 + 1.2 * rng.uniform();
    const double rho = 0.1 + 0.4 * rng.uniform();
    check(oracle::grouped_instance(kind, 50, 10, sigma2, 1000 + i), kind);
    check(oracle::gp_instance(kind, 30, sigma2, rho, 2000 + i), kind);
  }
  const double secs = since(t0);
  Outcome o;
  o.pass = worst_F < kGradTol && worst_theta < kGradTol && failed_modes == 0 && secs < kGradSeconds;
  o.detail = "max rel err grad_F " + fmt(worst_F, 3) + ", grad_theta " + fmt(worst_theta, 3) + " over " +
             std::to_string(2 * kGradInstances) + " instances (tol " + fmt(kGradTol) + "), " + fmt(secs, 3) + " s";
  return o;
}

Outcome dual_path() {
  double worst = 0.0;
  int cases = 0;
  auto check = [&](const oracle::Instance& in, LikelihoodKind kind) {
    const LatentModel model({kind, {}}, in.y, in.structure);
    const auto st = find_mode(model, in.theta, in.F, nullptr, tight_newton());
    const auto dense = oracle::dense_laplace(kind, in.y, in.F, in.Z, in.Sigma, in.dSigma);
    if (!st.converged || !dense.converged) {
      worst = INFINITY;
      return;
    }
    worst = std::max({worst, oracle::rel_err(laplace_nll(model, st), dense.nll, kDualFloor),
                      oracle::max_rel_err(st.mode, dense.mode, kDualFloor),
                      oracle::max_rel_err(grad_F(model, st), dense.grad_F, kDualFloor),
                      oracle::max_rel_err(grad_theta(model, st), dense.grad_log_theta, kDualFloor)});
    ++cases;
  };
  for (auto kind : {kProbit, kPoisson}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      check(oracle::grouped_instance(kind, 20 + 5 * static_cast<int>(seed), 5, 0.5 + 0.3 * seed, 300 + seed), kind);
      check(oracle::grouped_instance(kind, 40, 8, 1.0, 400 + seed), kind);
      check(oracle::gp_instance(kind, 15 + 5 * static_cast<int>(seed), 1.0, 0.2, 500 + seed), kind);
      check(oracle::gp_instance(kind, 40, 0.6, 0.35, 600 + seed), kind);
    }
  }
  Outcome o;
  o.pass = worst < kDualTol;
  o.detail = "max rel diff (value, mode, grad_F, grad_theta) vs dense " + fmt(worst, 3) + " on " +
             std::to_string(cases) + " instances with n <= 40 (tol " + fmt(kDualTol) + ")";
  return o;
}

Outcome quadrature_closed_form() {
  double worst_probit = 0.0, worst_poisson = 0.0;
  int cases = 0;
  for (int a = 0; a < 10; ++a) {
    const double mean = -3.0 + 6.0 * a / 9.0;
    for (int b = 0; b < 10; ++b) {
      const double var = kQuadVarLo * std::pow(kQuadVarHi / kQuadVarLo, b / 9.0);
      const double gh = predict_response(kProbit, mean, var, kQuadNodes, ResponseMethod::Quadrature);
      const double closed = predict_response(kProbit, mean, var, kQuadNodes, ResponseMethod::ClosedForm);
      // independent closed form
      const double direct = 0.5 * std::erfc(-mean / std::sqrt(1.0 + var) / std::numbers::sqrt2);
      worst_probit = std::max({worst_probit, std::abs(gh - closed), std::abs(gh - direct)});
      const double gh_mean = predict_response(kPoisson, mean, var, kQuadNodes, ResponseMethod::Quadrature);
      const double exact = std::exp(mean + 0.5 * var);
      worst_poisson = std::max(worst_poisson, std::abs(gh_mean - exact) / exact);
      ++cases;
    }
  }
  Outcome o;
  o.pass = worst_probit < kQuadTol && worst_poisson < kQuadTol;
  o.detail = std::to_string(cases) + "-case grid (mean -3..3, var " + fmt(kQuadVarLo) + ".." + fmt(kQuadVarHi) +
             "), " + std::to_string(kQuadNodes) + " nodes: probit max abs diff " + fmt(worst_probit, 3) + ", Poisson mean max rel diff " +
             fmt(worst_poisson, 3) + " (tol " + fmt(kQuadTol) + ")";
  return o;
}

// ---------------------------------------------------------------------------

struct Study {
  ExperimentReport report;
  double seconds = 0.0;
};

Study run_study(Scenario sc, std::vector<Method> methods) {
  ExperimentConfig cfg;
  cfg.sim = default_sim_config(sc);
  cfg.sim.runs = kReplicates;
  cfg.methods = std::move(methods);
  cfg.threads = worker_threads();
  const auto t0 = Clock::now();
  Study s;
  s.report = run_experiment(cfg, [&](const ReplicateResult& r) {
    std::cerr << "  " << to_string(sc) << " replicate " << r.replicate << " done (" << fmt(since(t0), 4) << " s)\n";
  });
  s.seconds = since(t0);
  std::cerr << to_string(sc) << ":\n" << format_report_table(s.report) << '\n';
  return s;
}

double mean_of(const ExperimentReport& r, Method m, const char* metric) {
  const auto v = r.values(m, metric);
  return v.size() == static_cast<std::size_t>(kReplicates) ? mean(v) : NAN;
}

/// Replicates where method a has a strictly smaller metric than method b.
int wins(const ExperimentReport& r, Method a, Method b, const char* metric) {
  const auto va = r.values(a, metric);
  const auto vb = r.values(b, metric);
  if (va.size() != vb.size()) return 0;
  int w = 0;
  for (std::size_t i = 0; i < va.size(); ++i) w += va[i] < vb[i] ? 1 : 0;
  return w;
}

Outcome grouped_binary(const Study& s) {
  const auto& r = s.report;
  const double err = mean_of(r, Method::LaGaBoost, "Error");
  const int err_wins = wins(r, Method::LaGaBoost, Method::Independent, "Error");
  const int nll_wins = wins(r, Method::LaGaBoost, Method::Linear, "NegLL");
  Outcome o;
  o.pass = r.failures == 0 && err >= kGroupedErrLo && err <= kGroupedErrHi && err_wins >= kMinWins &&
           nll_wins >= kMinWins && s.seconds < kGroupedSeconds;
  o.detail = "mean error " + fmt(err) + " (sd " + fmt(stddev(r.values(Method::LaGaBoost, "Error")), 2) + ", want [" +
             fmt(kGroupedErrLo) + ", " + fmt(kGroupedErrHi) + "]), error < LogitBoost in " +
             std::to_string(err_wins) + "/10 (mean " + fmt(mean_of(r, Method::Independent, "Error")) +
             "), NegLL < LinearME in " + std::to_string(nll_wins) + "/10, failures " + std::to_string(r.failures) +
             ", " + fmt(s.seconds, 4) + " s";
  return o;
}

Outcome spatial_binary(const Study& s) {
  const auto& r = s.report;
  const double lag = mean_of(r, Method::LaGaBoost, "Error");
  const double lin = mean_of(r, Method::Linear, "Error");
  const double ind = mean_of(r, Method::Independent, "Error");
  Outcome o;
  o.pass = r.failures == 0 && std::abs(lag - kSpatialErrTarget) <= kSpatialErrTol && lag < lin && lin < ind &&
           s.seconds < kSpatialSeconds;
  o.detail = "mean error LaGaBoost " + fmt(lag) + " (want " + fmt(kSpatialErrTarget) + " +- " + fmt(kSpatialErrTol) +
             "), LinearGP " + fmt(lin) + ", LogitBoost " + fmt(ind) + ", failures " + std::to_string(r.failures) +
             ", " + fmt(s.seconds, 4) + " s (incl. LaGaBoostOOS)";
  return o;
}

Outcome poisson(const Study& grouped, const Study& spatial) {
  Outcome o{true, ""};
  for (const auto& [study, target, name] : {std::tuple{&grouped, kRmseGroupedTarget, "grouped"},
                                           std::tuple{&spatial, kRmseSpatialTarget, "spatial"}}) {
    const auto& r = study->report;
    const double lag = mean_of(r, Method::LaGaBoost, "RMSE");
    const double ind = mean_of(r, Method::Independent, "RMSE");
    const bool ok = r.failures == 0 && lag < ind && std::abs(lag - target) <= kRmseTol;
    o.pass = o.pass && ok;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += std::string(name) + " RMSE LaGaBoost " + fmt(lag) + " vs PoisBoost " + fmt(ind) + " (want " +
                fmt(target) + " +- " + fmt(kRmseTol) + ")";
  }
  return o;
}

/// Adjacent pairs along the axis where the relative decrease goes up.
int inversions(const std::vector<SweepPoint>& pts) {
  int k = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) k += pts[i].rel_decrease > pts[i - 1].rel_decrease ? 1 : 0;
  return k;
}

Outcome sweep_trend() {
  ExperimentConfig base;
  base.sim.runs = kSweepRuns;
  base.threads = worker_threads();
  Outcome o{true, ""};
  for (SweepAxis axis : {SweepAxis::SamplesPerGroup, SweepAxis::Rho}) {
    const auto t0 = Clock::now();
    base.sim = default_sim_config(axis == SweepAxis::Rho ? Scenario::SpatialBinary : Scenario::GroupedBinary);
    base.sim.runs = kSweepRuns;
    const auto pts = run_sweep(base, axis, [&](const SweepPoint& p) {
      std::cerr << "  " << to_string(axis) << '=' << p.axis_value << " rel_decrease=" << fmt(p.rel_decrease)
                << " errors " << fmt(p.mean_error_lagaboost) << " / " << fmt(p.mean_error_independent) << " ("
                << fmt(since(t0), 4) << " s)\n";
    });
    const int inv = inversions(pts);
    const bool ok = pts.front().rel_decrease > pts.back().rel_decrease && inv <= kMaxInversions;
    o.pass = o.pass && ok;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += to_string(axis) + ":";
    for (const auto& p : pts) o.detail += " " + fmt(p.axis_value, 3) + "->" + fmt(p.rel_decrease, 3);
    o.detail += " (" + std::to_string(inv) + " inversions)";
  }
  return o;
}

Outcome mode_properties(const std::vector<const Study*>& studies) {
  double worst = 0.0;
  int fits = 0, unconverged = 0;
  for (const Study* s : studies) {
    for (const auto& rep : s->report.replicates) {
      for (const auto& m : rep.methods) {
        if (!m.ok || m.theta.size() == 0) continue;
        if (!m.converged) {
          ++unconverged;
          continue;
        }
        worst = std::max(worst, m.stationarity);
        ++fits;
      }
    }
  }
  double worst_rise = -INFINITY;
  for (Scenario sc : {Scenario::GroupedBinary, Scenario::SpatialBinary}) {
    const SimData d = gen_dataset(default_sim_config(sc), 0);
    BoostConfig c = to_config(frozen_tuning(sc, Method::LaGaBoost));
    c.iterations = kMonotoneIterations;
    c.learning_rate = kMonotoneRate;
    c.optimize_theta = false;
    FitTrace trace;
    fit_lagaboost(d.train.X, d.train.y, {kProbit, {}}, training_structure(d.train), c, &trace);
    for (std::size_t m = 1; m < trace.nll.size(); ++m) worst_rise = std::max(worst_rise, trace.nll[m] - trace.nll[m - 1]);
  }
  Outcome o;
  o.pass = fits > 0 && worst <= kStationarityTol && worst_rise <= kMonotoneTol;
  o.detail = "max stationarity residual " + fmt(worst, 3) + " over " + std::to_string(fits) + " converged fits (" +
             std::to_string(unconverged) + " not converged); largest per-step change of training risk with frozen "
             "theta " + fmt(worst_rise, 3) + " (tol " + fmt(kMonotoneTol) + ")";
  return o;
}

Outcome oos(const Study& spatial) {
  const auto& r = spatial.report;
  const auto* b_lag = r.find(Method::LaGaBoost, "Bias_sigma2");
  const auto* b_oos = r.find(Method::LaGaBoostOOS, "Bias_sigma2");
  const double e_lag = mean_of(r, Method::LaGaBoost, "Error");
  const double e_oos = mean_of(r, Method::LaGaBoostOOS, "Error");
  Outcome o;
  if (!b_lag || !b_oos) return {false, "missing sigma2 estimates"};
  o.pass = std::abs(b_oos->mean) <= std::abs(b_lag->mean) && e_oos <= e_lag + kOosErrSlack &&
           b_oos->count == kReplicates;
  o.detail = "bias(sigma2) OOS " + fmt(b_oos->mean) + " vs LaGaBoost " + fmt(b_lag->mean) + "; mean error OOS " +
             fmt(e_oos) + " vs " + fmt(e_lag) + " (slack " + fmt(kOosErrSlack) + ")";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> wanted(argv + 1, argv + argc);
  auto want = [&](const char* id) { return wanted.empty() || wanted.count(id) > 0; };
  int failed = 0;
  auto report = [&](const char* id, const char* title, const Outcome& o) {
    std::printf("%s %s %s: %s\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  };
  auto guarded = [&](const char* id, const char* title, const std::function<Outcome()>& fn) {
    try {
      report(id, title, fn());
    } catch (const std::exception& e) {
      report(id, title, {false, std::string("exception: ") + e.what()});
    }
  };

  if (want("P1")) guarded("P1", "gradient fidelity", gradient_fidelity);
  if (want("P2")) guarded("P2", "dual-path equivalence", dual_path);
  if (want("P3")) guarded("P3", "quadrature vs closed form", quadrature_closed_form);

  const bool need_gb = want("P4") || want("P8");
  const bool need_sb = want("P5") || want("P8") || want("P9");
  const bool need_poisson = want("P6") || want("P8");
  Study gb, sb, gp, sp;
  std::map<std::string, std::string> errors;
  auto study = [&](Study& out, Scenario sc, std::vector<Method> methods, const char* key) {
    try {
      out = run_study(sc, std::move(methods));
    } catch (const std::exception& e) {
      errors[key] = e.what();
    }
  };
  auto from_study = [&](std::initializer_list<const char*> keys, const std::function<Outcome()>& fn) {
    return [&, keys, fn]() -> Outcome {
      for (const char* k : keys) {
        if (errors.count(k)) return {false, std::string("study failed: ") + errors[k]};
      }
      return fn();
    };
  };

  if (need_gb) study(gb, Scenario::GroupedBinary, {Method::LaGaBoost, Method::Linear, Method::Independent}, "gb");
  if (want("P4")) guarded("P4", "grouped binary", from_study({"gb"}, [&] { return grouped_binary(gb); }));
  if (need_sb) {
    study(sb, Scenario::SpatialBinary, {Method::LaGaBoost, Method::Linear, Method::Independent, Method::LaGaBoostOOS},
          "sb");
  }
  if (want("P5")) guarded("P5", "spatial binary", from_study({"sb"}, [&] { return spatial_binary(sb); }));
  if (need_poisson) {
    study(gp, Scenario::GroupedPoisson, {Method::LaGaBoost, Method::Linear, Method::Independent}, "gp");
    study(sp, Scenario::SpatialPoisson, {Method::LaGaBoost, Method::Linear, Method::Independent}, "sp");
  }
  if (want("P6")) guarded("P6", "Poisson RMSE", from_study({"gp", "sp"}, [&] { return poisson(gp, sp); }));
  if (want("P7")) guarded("P7", "sweep trend", sweep_trend);
  if (want("P8")) {
    guarded("P8", "mode and monotonicity",
            from_study({"gb", "sb", "gp", "sp"}, [&] { return mode_properties({&gb, &sb, &gp, &sp}); }));
  }
  if (want("P9")) guarded("P9", "out-of-sample hyperparameters", from_study({"sb"}, [&] { return oos(sb); }));
  return failed == 0 ? 0 : 1;
}
