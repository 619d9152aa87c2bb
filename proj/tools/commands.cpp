#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <thread>

#include "lagaboost/boosting.hpp"
#include "lagaboost/csv.hpp"
#include "lagaboost/errors.hpp"
#include "lagaboost/experiment.hpp"
#include "lagaboost/model_io.hpp"
#include "lagaboost/prediction.hpp"

namespace lagaboost::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join(const Eigen::VectorXd& v, char sep = ';') {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += num(v[i]);
  }
  return s;
}

const std::vector<std::string> kLikelihoods{"bernoulli-probit", "poisson-log"};
const std::vector<std::string> kStructures{"grouped", "gp"};
const std::vector<std::string> kAlgorithms{"lagaboost", "lagaboost-oos", "linear", "independent"};
const std::vector<std::string> kScenarios{"grouped-binary", "spatial-binary", "grouped-poisson", "spatial-poisson"};
const std::vector<std::string> kAxes{"samples-per-group", "rho"};

void check_member(const std::string& flag, const std::string& value, const std::vector<std::string>& allowed) {
  if (std::find(allowed.begin(), allowed.end(), value) != allowed.end()) return;
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
  throw UsageError("--" + flag + ": '" + value + "' not in {" + list + "}");
}

void validate(const RunConfig& c) {
  check_member("likelihood", c.likelihood, kLikelihoods);
  check_member("structure", c.structure, kStructures);
  check_member("algorithm", c.algorithm, kAlgorithms);
  check_member("scenario", c.scenario, kScenarios);
  check_member("axis", c.axis, kAxes);
  if (c.iterations < 1) throw UsageError("--iterations must be at least 1");
  if (!(c.learning_rate > 0.0 && c.learning_rate <= 1.0)) throw UsageError("--learning-rate must be in (0, 1]");
  if (c.max_depth < 1) throw UsageError("--max-depth must be at least 1");
  if (c.min_leaf < 1) throw UsageError("--min-leaf must be at least 1");
  if (c.folds < 2) throw UsageError("--folds must be at least 2");
  if (c.runs < 1) throw UsageError("--runs must be at least 1");
  if (c.threads < 0) throw UsageError("--threads must be non-negative");
  if (c.structure == "gp" && c.loc_cols.size() != 2) throw UsageError("--loc-cols needs exactly two column names");
  if (c.command == "train" || c.command == "predict") {
    if (c.data.empty()) throw UsageError(c.command + ": --data is required");
    if (c.model.empty()) throw UsageError(c.command + ": --model is required");
  }
}

/// Writes to the --out file when given, else to the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("cannot open '" + path + "' for writing");
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

struct TrainingData {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::optional<LatentStructure> structure;
  StructureQuery query;
  ModelSchema schema;
};

bool is_grouped(const RunConfig& c) { return c.structure == "grouped"; }

TrainingData load_training(const RunConfig& c) {
  const CsvTable t = read_csv_file(c.data);
  TrainingData d;
  d.schema.algorithm = c.algorithm;
  d.schema.response_col = c.response_col;
  d.y = numeric_column(t, c.response_col);
  if (d.y.size() == 0) throw UsageError("no data rows in '" + c.data + "'");

  std::vector<std::string> reserved{c.response_col};
  std::vector<std::string> structure_cols;
  if (is_grouped(c)) {
    d.schema.group_col = c.group_col;
    structure_cols = {c.group_col};
    const auto labels = integer_column(t, c.group_col);
    d.structure = GroupedStructure::from_labels(labels);
    d.query = labels;
  } else {
    d.schema.loc_cols = c.loc_cols;
    structure_cols = c.loc_cols;
    const Eigen::MatrixXd locs = numeric_columns(t, c.loc_cols);
    d.structure = GpStructure(locs);
    d.query = locs;
  }
  reserved.insert(reserved.end(), structure_cols.begin(), structure_cols.end());
  for (const auto& h : t.header) {
    if (std::find(reserved.begin(), reserved.end(), h) == reserved.end()) d.schema.feature_cols.push_back(h);
  }
  if (c.algorithm == "independent") {
    // Independent boosting sees the grouping or locations as plain features.
    d.schema.feature_cols.insert(d.schema.feature_cols.end(), structure_cols.begin(), structure_cols.end());
    d.query = std::monostate{};
  }
  if (d.schema.feature_cols.empty()) throw UsageError("no feature columns in '" + c.data + "'");
  d.X = numeric_columns(t, d.schema.feature_cols);
  return d;
}

BoostConfig boost_config(const RunConfig& c) {
  BoostTuning t{c.iterations, c.learning_rate, c.max_depth, c.min_leaf};
  return to_config(t, c.seed);
}

void log_trace(std::ostream& log, const FitTrace& tr, const std::vector<double>& seconds) {
  for (std::size_t m = 0; m < tr.nll.size(); ++m) {
    log << "iter=" << m << " nll=" << num(tr.nll[m]);
    if (m < tr.theta.size()) log << " theta=" << join(tr.theta[m]);
    if (m < seconds.size()) log << " seconds=" << num(seconds[m]);
    log << '\n';
  }
}

}  // namespace

int resolve_threads(int requested) {
  const int cores = std::max(1u, std::thread::hardware_concurrency());
  if (requested == 0) {
    if (const char* env = std::getenv("LAGABOOST_THREADS")) {
      int v = 0;
      const std::string s(env);
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) requested = v;
    }
  }
  return requested > 0 ? std::min(cores, requested) : cores;
}

int cmd_train(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const TrainingData d = load_training(c);
  const LikelihoodSpec lik{parse_likelihood(c.likelihood), {}};
  validate_responses(lik, d.y);
  const BoostConfig bc = boost_config(c);

  std::ostringstream flog;
  flog << "algorithm=" << c.algorithm << " likelihood=" << c.likelihood << " structure=" << c.structure
       << " rows=" << d.y.size() << " features=" << d.X.cols() << '\n';
  const auto t0 = Clock::now();
  std::vector<double> seconds;
  auto observer = [&](const IterationInfo&) {
    seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
  };
  FitTrace trace;
  ModelFile file;
  file.schema = d.schema;

  if (c.algorithm == "lagaboost") {
    BoostedModel m = fit_lagaboost(d.X, d.y, lik, *d.structure, bc, &trace, observer);
    m.feature_names = d.schema.feature_cols;
    file.model = std::move(m);
  } else if (c.algorithm == "lagaboost-oos") {
    OosOptions opts;
    opts.folds = c.folds;
    OosDiagnostics diag;
    BoostedModel m = fit_lagaboost_oos(d.X, d.y, lik, *d.structure, bc, opts, &trace, &diag);
    m.feature_names = d.schema.feature_cols;
    for (std::size_t k = 0; k < diag.theta_folds.size(); ++k) {
      flog << "oos fold=" << k << " theta=" << join(diag.theta_folds[k].natural()) << '\n';
    }
    flog << "oos validation theta=" << join(diag.theta_validation.natural()) << " steps=" << diag.validation_steps
         << " converged=" << diag.validation_converged << '\n';
    flog << "oos frozen-theta rerun on full data: hyperparameter calls=" << trace.hyper_opt_calls << '\n';
    file.model = std::move(m);
  } else if (c.algorithm == "linear") {
    file.model = fit_linear_baseline(d.X, d.y, lik, *d.structure, {}, &trace);
  } else {
    BoostedModel m = fit_independent_boosting(d.X, d.y, lik, bc, &trace, observer);
    m.feature_names = d.schema.feature_cols;
    file.model = std::move(m);
  }
  const double total = std::chrono::duration<double>(Clock::now() - t0).count();
  log_trace(flog, trace, seconds);

  const PredictiveMoments mom = std::visit(
      [&](const auto& m) { return predict_latent(m, d.X, d.query); }, file.model);
  const double negll = -predictive_log_density(lik.kind, d.y, mom).sum();
  flog << "train_negll=" << num(negll) << " seconds=" << num(total) << '\n';

  save_model(file, c.model);
  log << flog.str();
  if (!c.out.empty()) {
    Sink sink(c.out, out);
    sink.stream() << flog.str();
  }
  return kOk;
}

int cmd_predict(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const ModelFile file = load_model(c.model);
  const CsvTable t = read_csv_file(c.data);
  const ModelSchema& s = file.schema;
  const LikelihoodKind kind = std::visit([](const auto& m) { return m.likelihood; }, file.model);
  const bool has_latent = std::visit([](const auto& m) { return m.latent.has_value(); }, file.model);

  for (const auto& col : s.feature_cols) t.column(col);
  StructureQuery query;
  if (has_latent) {
    if (!s.group_col.empty()) {
      query = integer_column(t, s.group_col);
    } else {
      query = numeric_columns(t, s.loc_cols);
    }
  }
  const Eigen::MatrixXd X = numeric_columns(t, s.feature_cols);

  Sink sink(c.out, out);
  std::ostream& os = sink.stream();
  os << "row_id,latent_mean,latent_var,response_pred\n";
  if (t.num_rows() == 0) {
    log << "rows=0\n";
    return kOk;
  }
  const PredictiveMoments mom = std::visit([&](const auto& m) { return predict_latent(m, X, query); }, file.model);
  const Eigen::VectorXd pred = predict_response(kind, mom);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    os << (i + 1) << ',' << num(mom.mean[i]) << ',' << num(mom.var[i]) << ',' << num(pred[i]) << '\n';
  }
  log << "rows=" << X.rows() << " unseen_groups=" << mom.unseen_groups << '\n';
  if (!s.response_col.empty() && t.has_column(s.response_col)) {
    const Eigen::VectorXd y = numeric_column(t, s.response_col);
    log << "negll=" << num(-predictive_log_density(kind, y, mom).sum()) << '\n';
  }
  return kOk;
}

namespace {

ExperimentConfig experiment_config(const RunConfig& c) {
  ExperimentConfig cfg;
  cfg.sim = default_sim_config(parse_scenario(c.scenario));
  cfg.sim.runs = c.runs;
  cfg.sim.seed = c.seed;
  cfg.threads = resolve_threads(c.threads);
  cfg.oos_folds = c.folds;
  if (c.tuning_given) {
    const BoostTuning t{c.iterations, c.learning_rate, c.max_depth, c.min_leaf};
    cfg.lagaboost_tuning = t;
    cfg.independent_tuning = t;
  }
  if (c.algorithm == "lagaboost-oos") cfg.methods.push_back(Method::LaGaBoostOOS);
  return cfg;
}

}  // namespace

int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& log) {
  const ExperimentConfig cfg = experiment_config(c);
  log << "scenario=" << c.scenario << " runs=" << cfg.sim.runs << " seed=" << cfg.sim.seed
      << " threads=" << cfg.threads << '\n';
  const ExperimentReport report = run_experiment(cfg, [&](const ReplicateResult& r) {
    log << "replicate " << r.replicate << " done";
    for (std::size_t k = 0; k < r.methods.size(); ++k) {
      const auto& m = r.methods[k];
      log << ' ' << to_string(cfg.methods[k]) << '=' << (m.ok ? "ok" : "failed: " + m.failure);
    }
    log << '\n';
  });
  out << format_report_table(report);
  if (!c.out.empty()) {
    Sink sink(c.out, out);
    write_report_csv(sink.stream(), report);
  }
  if (report.failures > 0) {
    log << report.failures << " method fits failed and were excluded from the summary\n";
    return kPartialFailure;
  }
  return kOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& log) {
  ExperimentConfig cfg = experiment_config(c);
  const SweepAxis axis = parse_axis(c.axis);
  int failures = 0;
  const auto points = run_sweep(cfg, axis, [&](const SweepPoint& p) {
    log << to_string(axis) << '=' << num(p.axis_value) << " lagaboost_error=" << num(p.mean_error_lagaboost)
        << " independent_error=" << num(p.mean_error_independent) << " rel_decrease=" << num(p.rel_decrease)
        << " failures=" << p.report.failures << '\n';
    failures += p.report.failures;
  });
  Sink sink(c.out, out);
  write_sweep_csv(sink.stream(), points);
  return failures > 0 ? kPartialFailure : kOk;
}

int cmd_tune(const RunConfig& c, std::ostream& out, std::ostream& log) {
  Method method = Method::LaGaBoost;
  if (c.algorithm == "independent") {
    method = Method::Independent;
  } else if (c.algorithm != "lagaboost") {
    throw UsageError("tune supports --algorithm lagaboost or independent");
  }
  TuningGrid grid;
  if (c.tuning_given) grid.max_iterations = c.iterations;
  std::vector<ValidationSplit> splits;
  LikelihoodSpec lik;
  if (!c.data.empty()) {
    const TrainingData d = load_training(c);
    lik.kind = parse_likelihood(c.likelihood);
    validate_responses(lik, d.y);
    splits = cv_splits(d.X, d.y, *d.structure, c.folds, c.seed);
    if (method == Method::Independent) {
      for (auto& s : splits) s.query_val = std::monostate{};
    }
    log << "tuning on " << c.folds << "-fold splits of " << c.data << '\n';
  } else {
    SimConfig sim = default_sim_config(parse_scenario(c.scenario));
    sim.seed = c.seed;
    lik.kind = likelihood_of(sim.scenario);
    splits = simulated_splits(sim, method, c.runs);
    log << "tuning on " << c.runs << " simulated " << c.scenario << " sets\n";
  }
  const TuningResult res = tune_grid(splits, lik, method, grid, resolve_threads(c.threads));
  Sink sink(c.out, out);
  std::ostream& os = sink.stream();
  os << "learning_rate,max_depth,min_leaf,iterations,score\n";
  for (const auto& cell : res.cells) {
    os << num(cell.tuning.learning_rate) << ',' << cell.tuning.max_depth << ',' << cell.tuning.min_leaf << ','
       << cell.tuning.iterations << ',' << num(cell.score) << '\n';
  }
  log << "best learning_rate=" << num(res.best.learning_rate) << " max_depth=" << res.best.max_depth
      << " min_leaf=" << res.best.min_leaf << " iterations=" << res.best.iterations
      << " score=" << num(res.best_score) << '\n';
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  CLI::App app{"Boosting with latent Gaussian models for non-Gaussian responses", "lagaboost"};
  app.require_subcommand(1, 1);
  RunConfig c;
  std::string config_path;

  // name -> (option, setter from a JSON config value)
  std::vector<std::pair<std::string, std::function<void(const nlohmann::json&)>>> keys;
  std::map<std::string, std::vector<CLI::Option*>> options;

  auto add_common = [&](CLI::App* sub) {
    auto add = [&](const std::string& name, auto* target, const std::string& help) {
      options[name].push_back(sub->add_option("--" + name, *target, help));
      return options[name].back();
    };
    add("data", &c.data, "input CSV with a header row");
    add("model", &c.model, "model JSON path");
    add("out", &c.out, "output path (default: standard output)");
    add("likelihood", &c.likelihood, "bernoulli-probit|poisson-log")->check(CLI::IsMember(kLikelihoods));
    add("structure", &c.structure, "grouped|gp")->check(CLI::IsMember(kStructures));
    add("group-col", &c.group_col, "grouping column (integer ids)");
    add("loc-cols", &c.loc_cols, "two location columns, comma separated")->delimiter(',');
    add("response-col", &c.response_col, "response column");
    add("iterations", &c.iterations, "boosting iterations");
    add("learning-rate", &c.learning_rate, "shrinkage");
    add("max-depth", &c.max_depth, "tree depth");
    add("min-leaf", &c.min_leaf, "minimum samples per leaf");
    add("seed", &c.seed, "random seed");
    add("algorithm", &c.algorithm, "lagaboost|lagaboost-oos|linear|independent")->check(CLI::IsMember(kAlgorithms));
    add("folds", &c.folds, "folds for lagaboost-oos and tuning");
    add("scenario", &c.scenario, "grouped-binary|spatial-binary|grouped-poisson|spatial-poisson")
        ->check(CLI::IsMember(kScenarios));
    add("runs", &c.runs, "simulation replicates");
    add("axis", &c.axis, "samples-per-group|rho")->check(CLI::IsMember(kAxes));
    add("threads", &c.threads, "maximum worker threads (0: all cores, or LAGABOOST_THREADS)");
    sub->add_option("--config", config_path, "JSON file with flat keys named like the flags");
  };
  auto set = [&](const std::string& name, auto* target) {
    keys.emplace_back(name, [target](const nlohmann::json& v) { *target = v.get<std::remove_pointer_t<decltype(target)>>(); });
  };
  set("data", &c.data);
  set("model", &c.model);
  set("out", &c.out);
  set("likelihood", &c.likelihood);
  set("structure", &c.structure);
  set("group-col", &c.group_col);
  set("loc-cols", &c.loc_cols);
  set("response-col", &c.response_col);
  set("iterations", &c.iterations);
  set("learning-rate", &c.learning_rate);
  set("max-depth", &c.max_depth);
  set("min-leaf", &c.min_leaf);
  set("seed", &c.seed);
  set("algorithm", &c.algorithm);
  set("folds", &c.folds);
  set("scenario", &c.scenario);
  set("runs", &c.runs);
  set("axis", &c.axis);
  set("threads", &c.threads);

  const std::vector<std::pair<std::string, std::string>> commands{
      {"train", "fit a model on a CSV file"},
      {"predict", "predict latent moments and responses for a CSV file"},
      {"simulate", "run the simulation study for one scenario"},
      {"sweep", "relative error decrease along samples-per-group or rho"},
      {"tune", "grid search over learning rate, depth, leaf size and iterations"}};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, log);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, log);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, log);
    return kUsage;
  }
  CLI::App* sub = app.get_subcommands().front();
  c.command = sub->get_name();
  auto given = [&](const std::string& name) {
    for (auto* opt : options.at(name)) {
      if (opt->count() > 0) return true;
    }
    return false;
  };

  try {
    nlohmann::json doc = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw UsageError("cannot open config file '" + config_path + "'");
      try {
        doc = nlohmann::json::parse(is);
      } catch (const nlohmann::json::exception& e) {
        throw UsageError("config file is not valid JSON: " + std::string(e.what()));
      }
      if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
      for (const auto& [key, value] : doc.items()) {
        const auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.first == key; });
        if (it == keys.end()) throw UsageError("unknown config key '" + key + "'");
        if (given(key)) continue;
        try {
          it->second(value);
        } catch (const nlohmann::json::exception&) {
          throw UsageError("config key '" + key + "' has the wrong type");
        }
      }
    }
    for (const char* k : {"iterations", "learning-rate", "max-depth", "min-leaf"}) {
      c.tuning_given = c.tuning_given || given(k) || doc.contains(k);
    }
    validate(c);

    if (c.command == "train") return cmd_train(c, out, log);
    if (c.command == "predict") return cmd_predict(c, out, log);
    if (c.command == "simulate") return cmd_simulate(c, out, log);
    if (c.command == "sweep") return cmd_sweep(c, out, log);
    return cmd_tune(c, out, log);
  } catch (const UsageError& e) {
    log << "error: " << e.what() << "\n\n" << sub->help();
    return kUsage;
  } catch (const NumericalError& e) {
    log << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const FactorizationError& e) {
    log << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace lagaboost::cli
