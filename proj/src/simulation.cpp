#include "lagaboost/simulation.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "lagaboost/latent_structure.hpp"
#include "lagaboost/normal.hpp"

namespace lagaboost {

namespace {
constexpr std::uint64_t kCalibrationSeed = 0xC0FFEE;
constexpr int kCalibrationDraws = 1'000'000;
}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::GroupedBinary: return "grouped-binary";
    case Scenario::SpatialBinary: return "spatial-binary";
    case Scenario::GroupedPoisson: return "grouped-poisson";
    case Scenario::SpatialPoisson: return "spatial-poisson";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::GroupedBinary, Scenario::SpatialBinary, Scenario::GroupedPoisson,
                     Scenario::SpatialPoisson}) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

bool is_grouped(Scenario s) { return s == Scenario::GroupedBinary || s == Scenario::GroupedPoisson; }

LikelihoodKind likelihood_of(Scenario s) {
  return s == Scenario::GroupedBinary || s == Scenario::SpatialBinary ? LikelihoodKind::BernoulliProbit
                                                                      : LikelihoodKind::PoissonLog;
}

double target_function_variance(Scenario s) { return likelihood_of(s) == LikelihoodKind::PoissonLog ? 0.2 : 1.0; }

SimConfig default_sim_config(Scenario s) {
  SimConfig c;
  c.scenario = s;
  c.n = is_grouped(s) ? 5000 : 500;
  c.sigma2 = likelihood_of(s) == LikelihoodKind::PoissonLog ? 0.2 : 1.0;
  return c;
}

void validate(const SimConfig& c) {
  if (c.n < 2) throw std::invalid_argument("simulation needs n >= 2");
  if (!(c.sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  if (c.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (is_grouped(c.scenario)) {
    if (c.samples_per_group < 1 || c.samples_per_group > c.n) {
      throw std::invalid_argument("samples per group must be in [1, n]");
    }
  } else if (!(c.rho > 0.0)) {
    throw std::invalid_argument("rho must be positive");
  }
}

int num_groups(const SimConfig& c) { return (c.n + c.samples_per_group - 1) / c.samples_per_group; }

double raw_function(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  if (x.size() < 3) throw std::invalid_argument("raw_function needs at least 3 inputs");
  return 2.0 * x[0] + x[1] * x[1] + (x[2] > 0.0 ? 4.0 : 0.0) + 2.0 * std::log(std::abs(x[0])) * x[2];
}

const FunctionCalibration& calibration(double target_variance) {
  if (!(target_variance > 0.0)) throw std::invalid_argument("target variance must be positive");
  static std::mutex mutex;
  static std::map<double, std::unique_ptr<FunctionCalibration>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[target_variance];
  if (!slot) {
    Rng rng(kCalibrationSeed);
    double mean = 0.0, m2 = 0.0;
    Eigen::RowVectorXd x(3);
    for (int i = 0; i < kCalibrationDraws; ++i) {
      do {
        x[0] = rng.normal();
      } while (x[0] == 0.0);
      x[1] = rng.normal();
      x[2] = rng.normal();
      const double v = raw_function(x);
      const double delta = v - mean;
      mean += delta / (i + 1);
      m2 += delta * (v - mean);
    }
    const double var = m2 / (kCalibrationDraws - 1);
    auto cal = std::make_unique<FunctionCalibration>();
    cal->scale = std::sqrt(target_variance / var);
    cal->offset = -cal->scale * mean;
    cal->target_variance = target_variance;
    cal->draws = kCalibrationDraws;
    slot = std::move(cal);
  }
  return *slot;
}

double fixed_function_row(const Eigen::Ref<const Eigen::RowVectorXd>& x, const FunctionCalibration& cal) {
  return cal.offset + cal.scale * raw_function(x);
}

Eigen::VectorXd fixed_function(const Eigen::Ref<const Eigen::MatrixXd>& X, const FunctionCalibration& cal) {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = fixed_function_row(X.row(i), cal);
  return out;
}

Eigen::MatrixXd draw_features(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd X(n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < 9; ++j) X(i, j) = rng.normal();
    while (X(i, 0) == 0.0) X(i, 0) = rng.normal();
  }
  return X;
}

Eigen::VectorXd draw_gp_effects(const Eigen::Ref<const Eigen::MatrixXd>& locations, double sigma2, double rho,
                                Rng& rng) {
  const Eigen::MatrixXd cov = exponential_cross_covariance(locations, locations, sigma2, rho);
  const auto llt = cholesky_with_jitter(cov);
  Eigen::VectorXd z(locations.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return llt.matrixL() * z;
}

namespace {

void draw_responses(SimSet& set, LikelihoodKind kind, Rng& rng) {
  set.y.resize(set.F.size());
  for (Eigen::Index i = 0; i < set.y.size(); ++i) {
    const double mu = set.F[i] + set.effect[i];
    if (kind == LikelihoodKind::BernoulliProbit) {
      set.y[i] = rng.bernoulli(normal::cdf(mu)) ? 1.0 : 0.0;
    } else {
      set.y[i] = static_cast<double>(rng.poisson(std::exp(clamp_mu(kind, mu))));
    }
  }
}

Eigen::MatrixXd draw_locations(Eigen::Index n, bool excluded_square, Rng& rng) {
  Eigen::MatrixXd locs(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (excluded_square) {
      locs(i, 0) = rng.uniform(0.5, 1.0);
      locs(i, 1) = rng.uniform(0.5, 1.0);
    } else {
      do {
        locs(i, 0) = rng.uniform();
        locs(i, 1) = rng.uniform();
      } while (locs(i, 0) >= 0.5 && locs(i, 1) >= 0.5);
    }
  }
  return locs;
}

}  // namespace

SimData gen_dataset(const SimConfig& config, std::uint64_t replicate) {
  validate(config);
  SimData data;
  data.calibration = calibration(target_function_variance(config.scenario));
  const LikelihoodKind kind = likelihood_of(config.scenario);
  Rng rng(config.seed, replicate);
  const Eigen::Index n = config.n;

  SimSet* sets[3] = {&data.train, &data.interp, &data.extrap};
  for (SimSet* s : sets) {
    s->X = draw_features(n, rng);
    s->F = fixed_function(s->X, data.calibration);
  }

  if (is_grouped(config.scenario)) {
    const int m = num_groups(config);
    const double sd = std::sqrt(config.sigma2);
    Eigen::VectorXd b(2 * m);
    for (Eigen::Index j = 0; j < b.size(); ++j) b[j] = sd * rng.normal();
    for (int k = 0; k < 3; ++k) {
      SimSet& s = *sets[k];
      const std::int64_t base = k == 2 ? m : 0;
      s.groups.resize(n);
      s.effect.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        s.groups[i] = base + i / config.samples_per_group;
        s.effect[i] = b[s.groups[i]];
      }
    }
  } else {
    data.train.locations = draw_locations(n, false, rng);
    data.interp.locations = draw_locations(n, false, rng);
    data.extrap.locations = draw_locations(n, true, rng);
    Eigen::MatrixXd all(3 * n, 2);
    all << data.train.locations, data.interp.locations, data.extrap.locations;
    const Eigen::VectorXd b = draw_gp_effects(all, config.sigma2, config.rho, rng);
    for (int k = 0; k < 3; ++k) sets[k]->effect = b.segment(k * n, n);
  }
  for (SimSet* s : sets) draw_responses(*s, kind, rng);
  return data;
}

}  // namespace lagaboost
