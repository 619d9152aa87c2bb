#include "lagaboost/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lagaboost/metrics.hpp"
#include "lagaboost/prediction.hpp"

namespace lagaboost {

std::string to_string(Method m) {
  switch (m) {
    case Method::LaGaBoost: return "lagaboost";
    case Method::Linear: return "linear";
    case Method::Independent: return "independent";
    case Method::LaGaBoostOOS: return "lagaboost-oos";
  }
  return "unknown";
}

std::string display_name(Method m, Scenario s) {
  switch (m) {
    case Method::LaGaBoost: return "LaGaBoost";
    case Method::Linear: return is_grouped(s) ? "LinearME" : "LinearGP";
    case Method::Independent: return likelihood_of(s) == LikelihoodKind::PoissonLog ? "PoisBoost" : "LogitBoost";
    case Method::LaGaBoostOOS: return "LaGaBoostOOS";
  }
  return "unknown";
}

BoostConfig to_config(const BoostTuning& t, std::uint64_t seed) {
  BoostConfig c;
  c.iterations = t.iterations;
  c.learning_rate = t.learning_rate;
  c.tree.max_depth = t.max_depth;
  c.tree.min_samples_leaf = t.min_leaf;
  c.seed = seed;
  return c;
}

BoostTuning frozen_tuning(Scenario s, Method m) {
  const bool indep = m == Method::Independent;
  switch (s) {
    case Scenario::GroupedBinary: return indep ? BoostTuning{100, 0.1, 5, 10} : BoostTuning{100, 0.1, 5, 10};
    case Scenario::SpatialBinary: return indep ? BoostTuning{50, 0.1, 2, 10} : BoostTuning{50, 0.1, 2, 10};
    case Scenario::GroupedPoisson: return indep ? BoostTuning{100, 0.1, 2, 10} : BoostTuning{100, 0.1, 2, 10};
    case Scenario::SpatialPoisson: return indep ? BoostTuning{50, 0.1, 2, 10} : BoostTuning{50, 0.1, 2, 10};
  }
  return {};
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Data plumbing

LatentStructure training_structure(const SimSet& set) {
  if (!set.groups.empty()) return GroupedStructure::from_labels(set.groups);
  return GpStructure(set.locations);
}

StructureQuery structure_query(const SimSet& set) {
  if (!set.groups.empty()) return set.groups;
  return set.locations;
}

Eigen::MatrixXd method_features(Method method, const SimSet& set) {
  if (method != Method::Independent) return set.X;
  if (!set.groups.empty()) {
    Eigen::MatrixXd X(set.X.rows(), set.X.cols() + 1);
    X.leftCols(set.X.cols()) = set.X;
    for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, set.X.cols()) = static_cast<double>(set.groups[i]);
    return X;
  }
  Eigen::MatrixXd X(set.X.rows(), set.X.cols() + set.locations.cols());
  X << set.X, set.locations;
  return X;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void score(MethodMetrics& out, LikelihoodKind kind, const PredictiveMoments& interp, const SimSet& interp_set,
           const PredictiveMoments& extrap, const SimSet& extrap_set, int nodes) {
  const Eigen::VectorXd pred_i = predict_response(kind, interp, nodes);
  const Eigen::VectorXd pred_e = predict_response(kind, extrap, nodes);
  out.negll = -predictive_log_density(kind, interp_set.y, interp, nodes).sum();
  out.negll_ext = -predictive_log_density(kind, extrap_set.y, extrap, nodes).sum();
  if (kind == LikelihoodKind::BernoulliProbit) {
    out.error = error_rate(interp_set.y, pred_i);
    out.error_ext = error_rate(extrap_set.y, pred_e);
    out.auc = auc(interp_set.y, pred_i);
    out.auc_ext = auc(extrap_set.y, pred_e);
  } else {
    out.rmse = rmse(interp_set.y, pred_i);
    out.rmse_ext = rmse(extrap_set.y, pred_e);
  }
}

void record_latent(MethodMetrics& out, const std::optional<LatentFit>& fit) {
  if (!fit) return;
  out.theta = fit->theta.natural();
  out.converged = fit->converged;
  out.stationarity = fit->stationarity;
  out.train_nll = fit->nll;
}

}  // namespace

ReplicateResult run_replicate(const ExperimentConfig& config, std::uint64_t r) {
  const SimData data = gen_dataset(config.sim, r);
  const Scenario sc = config.sim.scenario;
  const LikelihoodSpec lik{likelihood_of(sc), {}};
  const LatentStructure structure = training_structure(data.train);
  const StructureQuery q_interp = structure_query(data.interp);
  const StructureQuery q_extrap = structure_query(data.extrap);
  const BoostTuning lt = config.lagaboost_tuning.value_or(frozen_tuning(sc, Method::LaGaBoost));
  const BoostTuning it = config.independent_tuning.value_or(frozen_tuning(sc, Method::Independent));
  const std::uint64_t fit_seed = derive_seed(config.sim.seed, r + 0x10000);

  ReplicateResult res;
  res.replicate = r;
  for (Method method : config.methods) {
    MethodMetrics mm;
    try {
      const auto t0 = Clock::now();
      switch (method) {
        case Method::LaGaBoost:
        case Method::LaGaBoostOOS: {
          const BoostConfig bc = to_config(lt, fit_seed);
          OosOptions oos;
          oos.folds = config.oos_folds;
          const BoostedModel model = method == Method::LaGaBoost
                                         ? fit_lagaboost(data.train.X, data.train.y, lik, structure, bc)
                                         : fit_lagaboost_oos(data.train.X, data.train.y, lik, structure, bc, oos);
          mm.seconds = seconds_since(t0);
          record_latent(mm, model.latent);
          score(mm, lik.kind, predict_latent(model, data.interp.X, q_interp), data.interp,
                predict_latent(model, data.extrap.X, q_extrap), data.extrap, config.quadrature_nodes);
          break;
        }
        case Method::Linear: {
          const LinearModel model = fit_linear_baseline(data.train.X, data.train.y, lik, structure);
          mm.seconds = seconds_since(t0);
          record_latent(mm, model.latent);
          score(mm, lik.kind, predict_latent(model, data.interp.X, q_interp), data.interp,
                predict_latent(model, data.extrap.X, q_extrap), data.extrap, config.quadrature_nodes);
          break;
        }
        case Method::Independent: {
          const BoostedModel model =
              fit_independent_boosting(method_features(method, data.train), data.train.y, lik, to_config(it, fit_seed));
          mm.seconds = seconds_since(t0);
          score(mm, lik.kind, predict_latent(model, method_features(method, data.interp), {}), data.interp,
                predict_latent(model, method_features(method, data.extrap), {}), data.extrap,
                config.quadrature_nodes);
          break;
        }
      }
      mm.ok = true;
    } catch (const std::exception& e) {
      mm.ok = false;
      mm.failure = e.what();
    }
    res.methods.push_back(std::move(mm));
  }
  return res;
}

std::optional<double> metric_value(const MethodMetrics& m, std::string_view metric) {
  if (!m.ok) return std::nullopt;
  if (metric == "Error") return m.error;
  if (metric == "Error_ext") return m.error_ext;
  if (metric == "NegLL") return m.negll;
  if (metric == "NegLL_ext") return m.negll_ext;
  if (metric == "AUC") return m.auc;
  if (metric == "AUC_ext") return m.auc_ext;
  if (metric == "RMSE") return m.rmse;
  if (metric == "RMSE_ext") return m.rmse_ext;
  if (metric == "Time") return m.seconds;
  if (metric == "sigma2") return m.theta.size() > 0 ? std::optional<double>(m.theta[0]) : std::nullopt;
  if (metric == "rho") return m.theta.size() > 1 ? std::optional<double>(m.theta[1]) : std::nullopt;
  throw std::invalid_argument("unknown metric '" + std::string(metric) + "'");
}

std::vector<std::string> metric_names(Scenario s) {
  if (likelihood_of(s) == LikelihoodKind::BernoulliProbit) {
    return {"Error", "NegLL", "AUC", "Error_ext", "NegLL_ext", "AUC_ext"};
  }
  return {"RMSE", "NegLL", "RMSE_ext", "NegLL_ext"};
}

std::vector<double> ExperimentReport::values(Method m, std::string_view metric) const {
  const auto& ms = config.methods;
  const auto pos = std::find(ms.begin(), ms.end(), m);
  if (pos == ms.end()) return {};
  const std::size_t k = static_cast<std::size_t>(pos - ms.begin());
  std::vector<double> out;
  for (const auto& r : replicates) {
    if (auto v = metric_value(r.methods[k], metric)) out.push_back(*v);
  }
  return out;
}

const SummaryRow* ExperimentReport::find(Method m, std::string_view metric) const {
  const std::string name = display_name(m, config.sim.scenario);
  for (const auto& row : summary) {
    if (row.method == name && row.metric == metric) return &row;
  }
  return nullptr;
}

void summarize(ExperimentReport& report) {
  report.summary.clear();
  report.failures = 0;
  const auto& methods = report.config.methods;
  const Scenario sc = report.config.sim.scenario;
  for (const auto& r : report.replicates) {
    for (const auto& m : r.methods) report.failures += m.ok ? 0 : 1;
  }
  const auto base = std::find(methods.begin(), methods.end(), Method::LaGaBoost);
  const std::size_t base_k = static_cast<std::size_t>(base - methods.begin());

  for (std::size_t k = 0; k < methods.size(); ++k) {
    const std::string name = display_name(methods[k], sc);
    for (const auto& metric : metric_names(sc)) {
      std::vector<double> vals, a, b;
      for (const auto& r : report.replicates) {
        const auto v = metric_value(r.methods[k], metric);
        if (!v) continue;
        vals.push_back(*v);
        if (base != methods.end() && k != base_k) {
          if (const auto w = metric_value(r.methods[base_k], metric)) {
            a.push_back(*w);
            b.push_back(*v);
          }
        }
      }
      if (vals.empty()) continue;
      SummaryRow row{name, metric, mean(vals), stddev(vals), std::nullopt, static_cast<int>(vals.size())};
      if (a.size() >= 2) row.p_value = paired_t_test(a, b).p_value;
      report.summary.push_back(row);
    }
    const std::vector<std::pair<std::string, double>> params = {
        {"sigma2", report.config.sim.sigma2}, {"rho", report.config.sim.rho}};
    for (const auto& [pname, truth] : params) {
      if (pname == "rho" && is_grouped(sc)) continue;
      std::vector<double> est;
      for (const auto& r : report.replicates) {
        if (auto v = metric_value(r.methods[k], pname)) est.push_back(*v);
      }
      if (est.empty()) continue;
      const ParamError pe = parameter_error(est, truth);
      report.summary.push_back({name, "RMSE_" + pname, pe.rmse, 0.0, std::nullopt, static_cast<int>(est.size())});
      report.summary.push_back({name, "Bias_" + pname, pe.bias, 0.0, std::nullopt, static_cast<int>(est.size())});
    }
    std::vector<double> times;
    for (const auto& r : report.replicates) {
      if (auto v = metric_value(r.methods[k], "Time")) times.push_back(*v);
    }
    if (!times.empty()) {
      report.summary.push_back({name, "Time", mean(times), stddev(times), std::nullopt, static_cast<int>(times.size())});
    }
  }
}

ExperimentReport run_experiment(const ExperimentConfig& config, const ReplicateCallback& on_replicate) {
  validate(config.sim);
  if (config.methods.empty()) throw std::invalid_argument("no methods selected");
  ExperimentReport report;
  report.config = config;
  report.calibration = calibration(target_function_variance(config.sim.scenario));
  report.replicates.resize(config.sim.runs);
  const auto t0 = Clock::now();
  std::mutex callback_mutex;
  parallel_for(config.sim.runs, config.threads, [&](int r) {
    report.replicates[r] = run_replicate(config, static_cast<std::uint64_t>(r));
    if (on_replicate) {
      std::lock_guard<std::mutex> lock(callback_mutex);
      on_replicate(report.replicates[r]);
    }
  });
  report.seconds = seconds_since(t0);
  summarize(report);
  return report;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string fmt_short(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

void write_report_csv(std::ostream& os, const ExperimentReport& report) {
  os << "method,metric,mean,sd,p_value,count\n";
  for (const auto& row : report.summary) {
    os << row.method << ',' << row.metric << ',' << fmt(row.mean) << ',' << fmt(row.sd) << ','
       << (row.p_value ? fmt(*row.p_value) : "") << ',' << row.count << '\n';
  }
  os << "calibration,C1," << fmt(report.calibration.offset) << ",,," << report.calibration.draws << '\n';
  os << "calibration,C2," << fmt(report.calibration.scale) << ",,," << report.calibration.draws << '\n';
  os << "all,failures," << report.failures << ",,," << report.replicates.size() << '\n';
}

std::string format_report_table(const ExperimentReport& report) {
  const Scenario sc = report.config.sim.scenario;
  std::vector<std::string> cols;
  for (Method m : report.config.methods) cols.push_back(display_name(m, sc));
  std::vector<std::string> metrics = metric_names(sc);
  for (const char* extra : {"RMSE_sigma2", "Bias_sigma2", "RMSE_rho", "Bias_rho", "Time"}) metrics.push_back(extra);

  std::ostringstream os;
  const int w0 = 12, w = 14;
  os << std::left << std::setw(w0) << "";
  for (const auto& c : cols) os << std::setw(w) << c;
  os << '\n';
  for (const auto& metric : metrics) {
    bool any = false;
    std::ostringstream mean_line, sd_line, p_line;
    mean_line << std::left << std::setw(w0) << metric;
    sd_line << std::left << std::setw(w0) << "  (sd)";
    p_line << std::left << std::setw(w0) << "  [p-val]";
    bool any_sd = false, any_p = false;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const SummaryRow* row = report.find(report.config.methods[k], metric);
      mean_line << std::setw(w) << (row ? fmt_short(row->mean) : "");
      const bool show_sd = row && metric.rfind("RMSE_", 0) != 0 && metric.rfind("Bias_", 0) != 0;
      sd_line << std::setw(w) << (show_sd ? "(" + fmt_short(row->sd) + ")" : "");
      p_line << std::setw(w) << (row && row->p_value ? "[" + fmt_short(*row->p_value) + "]" : "");
      any = any || row;
      any_sd = any_sd || show_sd;
      any_p = any_p || (row && row->p_value);
    }
    if (!any) continue;
    os << mean_line.str() << '\n';
    if (any_sd && metric != "Time") os << sd_line.str() << '\n';
    if (any_p) os << p_line.str() << '\n';
  }
  os << "replicates: " << report.replicates.size() << ", failed fits: " << report.failures
     << ", C1 = " << fmt_short(report.calibration.offset) << ", C2 = " << fmt_short(report.calibration.scale) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Sweeps

std::string to_string(SweepAxis a) { return a == SweepAxis::SamplesPerGroup ? "samples-per-group" : "rho"; }

SweepAxis parse_axis(std::string_view name) {
  if (name == "samples-per-group") return SweepAxis::SamplesPerGroup;
  if (name == "rho") return SweepAxis::Rho;
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "'");
}

std::vector<double> sweep_values(SweepAxis a) {
  if (a == SweepAxis::SamplesPerGroup) return {10, 20, 50, 100, 200};
  return {0.1, 0.2, 0.5, 1.0};
}

double relative_decrease(double err_independent, double err_lagaboost) {
  if (err_independent == err_lagaboost) return 0.0;
  return (err_independent - err_lagaboost) / err_independent;
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                                  const std::function<void(const SweepPoint&)>& on_point) {
  const Scenario sc = axis == SweepAxis::SamplesPerGroup ? Scenario::GroupedBinary : Scenario::SpatialBinary;
  std::vector<SweepPoint> points;
  for (double v : sweep_values(axis)) {
    ExperimentConfig cfg = base;
    cfg.sim = default_sim_config(sc);
    cfg.sim.runs = base.sim.runs;
    cfg.sim.seed = base.sim.seed;
    if (axis == SweepAxis::SamplesPerGroup) {
      cfg.sim.samples_per_group = static_cast<int>(v);
    } else {
      cfg.sim.rho = v;
    }
    if (base.sim.scenario != sc) {
      cfg.lagaboost_tuning.reset();
      cfg.independent_tuning.reset();
    }
    cfg.methods = {Method::LaGaBoost, Method::Independent};
    SweepPoint pt;
    pt.axis_value = v;
    pt.report = run_experiment(cfg);
    std::vector<double> rel, lag, ind;
    for (const auto& r : pt.report.replicates) {
      if (!r.methods[0].ok || !r.methods[1].ok) continue;
      lag.push_back(r.methods[0].error);
      ind.push_back(r.methods[1].error);
      rel.push_back(relative_decrease(r.methods[1].error, r.methods[0].error));
    }
    pt.mean_error_lagaboost = mean(lag);
    pt.mean_error_independent = mean(ind);
    pt.rel_decrease = mean(rel);
    if (on_point) on_point(pt);
    points.push_back(std::move(pt));
  }
  return points;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points) {
  os << "axis_value,method,mean_error,rel_decrease\n";
  for (const auto& p : points) {
    os << fmt(p.axis_value) << ",LaGaBoost," << fmt(p.mean_error_lagaboost) << ',' << fmt(p.rel_decrease) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Tuning

std::vector<double> score_path(const ValidationSplit& split, const LikelihoodSpec& likelihood, Method method,
                               const BoostConfig& config, int nodes) {
  std::vector<double> scores;
  scores.reserve(config.iterations);
  Eigen::VectorXd F_val;
  auto score_moments = [&](const PredictiveMoments& mom) {
    return -predictive_log_density(likelihood.kind, split.y_val, mom, nodes).sum();
  };
  if (method == Method::Independent) {
    auto observer = [&](const IterationInfo& info) {
      if (info.iteration == 0) {
        F_val = Eigen::VectorXd::Constant(split.X_val.rows(), (*info.F)[0]);
        return;
      }
      F_val += config.learning_rate * info.tree->predict(split.X_val);
      scores.push_back(score_moments(predict_latent(nullptr, F_val, {})));
    };
    fit_independent_boosting(split.X_train, split.y_train, likelihood, config, nullptr, observer);
  } else if (method == Method::LaGaBoost) {
    auto observer = [&](const IterationInfo& info) {
      if (info.iteration == 0) {
        F_val = Eigen::VectorXd::Constant(split.X_val.rows(), (*info.F)[0]);
        return;
      }
      F_val += config.learning_rate * info.tree->predict(split.X_val);
      LatentFit fit;
      fit.structure = split.structure_train;
      fit.theta = info.state->theta;
      fit.mode = info.state->mode;
      fit.d1 = info.state->derivs.d1;
      fit.w_tilde = info.state->w_tilde;
      fit.converged = info.state->converged;
      scores.push_back(score_moments(predict_latent(&fit, F_val, split.query_val)));
    };
    fit_lagaboost(split.X_train, split.y_train, likelihood, split.structure_train, config, nullptr, observer);
  } else {
    throw std::invalid_argument("path scoring is defined for boosting methods only");
  }
  return scores;
}

TuningResult tune_grid(const std::vector<ValidationSplit>& splits, const LikelihoodSpec& likelihood, Method method,
                       const TuningGrid& grid, int threads) {
  if (grid.max_iterations < 1 || grid.learning_rates.empty() || grid.max_depths.empty() || grid.min_leaves.empty()) {
    throw std::invalid_argument("empty tuning grid");
  }
  TuningResult result;
  if (grid.size() == 1) {
    result.best = {grid.max_iterations, grid.learning_rates[0], grid.max_depths[0], grid.min_leaves[0]};
    result.best_score = std::numeric_limits<double>::quiet_NaN();
    result.cells.push_back({result.best, result.best_score});
    return result;
  }
  if (splits.empty()) throw std::invalid_argument("tuning needs at least one validation split");

  std::vector<BoostTuning> cells;
  for (double lr : grid.learning_rates) {
    for (int d : grid.max_depths) {
      for (int leaf : grid.min_leaves) cells.push_back({grid.max_iterations, lr, d, leaf});
    }
  }
  const int jobs = static_cast<int>(cells.size() * splits.size());
  std::vector<std::vector<double>> paths(jobs);
  parallel_for(jobs, threads, [&](int j) {
    const auto& cell = cells[j / splits.size()];
    paths[j] = score_path(splits[j % splits.size()], likelihood, method, to_config(cell));
  });

  result.best_score = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    TuningCell best_cell{cells[c], std::numeric_limits<double>::infinity()};
    for (int m = 0; m < grid.max_iterations; ++m) {
      double total = 0.0;
      for (std::size_t s = 0; s < splits.size(); ++s) total += paths[c * splits.size() + s][m];
      const double avg = total / static_cast<double>(splits.size());
      if (avg < best_cell.score) {
        best_cell.score = avg;
        best_cell.tuning.iterations = m + 1;
      }
    }
    result.cells.push_back(best_cell);
    if (best_cell.score < result.best_score) {
      result.best_score = best_cell.score;
      result.best = best_cell.tuning;
    }
  }
  return result;
}

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<int>& rows) {
  Eigen::MatrixXd out(rows.size(), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd rows_of(const Eigen::VectorXd& v, const std::vector<int>& rows) {
  Eigen::VectorXd out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i]];
  return out;
}

StructureQuery query_rows(const LatentStructure& s, const std::vector<int>& rows) {
  if (const auto* g = std::get_if<GroupedStructure>(&s)) {
    std::vector<std::int64_t> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = g->labels()[g->group_index()[rows[i]]];
    return labels;
  }
  return rows_of(std::get<GpStructure>(s).locations(), rows);
}

}  // namespace

std::vector<ValidationSplit> cv_splits(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                       const LatentStructure& structure, int k, std::uint64_t seed) {
  const auto* g = std::get_if<GroupedStructure>(&structure);
  const std::vector<int> folds = make_folds(y.size(), k, seed, g ? &g->group_index() : nullptr);
  std::vector<ValidationSplit> splits;
  for (int v = 0; v < k; ++v) {
    std::vector<int> tr, va;
    for (Eigen::Index i = 0; i < y.size(); ++i) (folds[i] == v ? va : tr).push_back(static_cast<int>(i));
    ValidationSplit s{rows_of(X, tr), rows_of(y, tr), subset_structure(structure, tr),
                      rows_of(X, va), rows_of(y, va), query_rows(structure, va)};
    splits.push_back(std::move(s));
  }
  return splits;
}

std::vector<ValidationSplit> simulated_splits(const SimConfig& config, Method method, int sets) {
  std::vector<ValidationSplit> splits;
  for (int i = 0; i < sets; ++i) {
    // streams far from replicate indices so tuning data never overlaps test runs
    const SimData d = gen_dataset(config, 1'000'000ULL + static_cast<std::uint64_t>(i));
    ValidationSplit s{method_features(method, d.train), d.train.y, training_structure(d.train), {}, {}, {}};
    const Eigen::MatrixXd xi = method_features(method, d.interp);
    const Eigen::MatrixXd xe = method_features(method, d.extrap);
    s.X_val.resize(xi.rows() + xe.rows(), xi.cols());
    s.X_val << xi, xe;
    s.y_val.resize(d.interp.y.size() + d.extrap.y.size());
    s.y_val << d.interp.y, d.extrap.y;
    if (!d.train.groups.empty()) {
      std::vector<std::int64_t> labels = d.interp.groups;
      labels.insert(labels.end(), d.extrap.groups.begin(), d.extrap.groups.end());
      s.query_val = labels;
    } else {
      Eigen::MatrixXd locs(d.interp.locations.rows() + d.extrap.locations.rows(), 2);
      locs << d.interp.locations, d.extrap.locations;
      s.query_val = locs;
    }
    splits.push_back(std::move(s));
  }
  return splits;
}

}  // namespace lagaboost
