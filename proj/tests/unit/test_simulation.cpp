#include <doctest.h>

#include <cmath>
#include <set>

#include "lagaboost/simulation.hpp"

using namespace lagaboost;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

bool in_upper_quadrant(const Eigen::Ref<const Eigen::RowVectorXd>& s) { return s[0] >= 0.5 && s[1] >= 0.5; }

}  // namespace

TEST_SUITE("simulation") {
  TEST_CASE("raw function plug-in and indicator jump") {
    Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(9);
    x[0] = 1.0;
    x[2] = -1.0;
    CHECK(raw_function(x) == 2.0);
    const auto& cal = calibration(1.0);
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(9), b = a;
    a[0] = b[0] = 1.0;
    a[2] = 1e-12;
    b[2] = -1e-12;
    CHECK(fixed_function_row(a, cal) - fixed_function_row(b, cal) == doctest::Approx(4.0 * cal.scale).epsilon(1e-9));
  }

  TEST_CASE("calibration hits the target moments on fresh draws") {
    for (double target : {1.0, 0.2}) {
      const auto& cal = calibration(target);
      CHECK(cal.draws == 1000000);
      Rng rng(2024, 77);
      const MatrixXd X = draw_features(100000, rng);
      const VectorXd F = fixed_function(X, cal);
      const double mean = F.mean();
      const double var = (F.array() - mean).square().sum() / (F.size() - 1);
      CHECK(std::abs(mean) <= 0.05);
      CHECK(var >= 0.9 * target);
      CHECK(var <= 1.1 * target);
      CHECK(&calibration(target) == &cal);
    }
  }

  TEST_CASE("scenario defaults") {
    const auto g = default_sim_config(Scenario::GroupedBinary);
    CHECK(g.n == 5000);
    CHECK(g.samples_per_group == 10);
    CHECK(num_groups(g) == 500);
    CHECK(g.sigma2 == 1.0);
    const auto s = default_sim_config(Scenario::SpatialBinary);
    CHECK(s.n == 500);
    CHECK(s.rho == 0.1);
    CHECK(default_sim_config(Scenario::GroupedPoisson).sigma2 == 0.2);
    CHECK(default_sim_config(Scenario::SpatialPoisson).sigma2 == 0.2);
    CHECK(parse_scenario("spatial-poisson") == Scenario::SpatialPoisson);
    CHECK(to_string(Scenario::GroupedBinary) == "grouped-binary");
    CHECK_THROWS_AS(parse_scenario("tabular"), std::invalid_argument);
  }

  TEST_CASE("grouped datasets share groups for interpolation only") {
    const auto cfg = default_sim_config(Scenario::GroupedBinary);
    const auto d = gen_dataset(cfg, 0);
    CHECK(d.train.X.rows() == 5000);
    CHECK(d.train.X.cols() == 9);
    const std::set<std::int64_t> train(d.train.groups.begin(), d.train.groups.end());
    const std::set<std::int64_t> interp(d.interp.groups.begin(), d.interp.groups.end());
    const std::set<std::int64_t> extrap(d.extrap.groups.begin(), d.extrap.groups.end());
    CHECK(train.size() == 500);
    CHECK(train == interp);
    for (auto gid : extrap) CHECK(train.count(gid) == 0);
    for (int i = 0; i < 5000; ++i) {
      CHECK(d.train.y[i] * (1.0 - d.train.y[i]) == 0.0);
    }
    // same group, same effect across train and interpolation sets
    CHECK(d.train.effect[0] == d.interp.effect[0]);
    CHECK(d.train.X.row(0) != d.interp.X.row(0));
  }

  TEST_CASE("spatial regions") {
    const auto cfg = default_sim_config(Scenario::SpatialPoisson);
    const auto d = gen_dataset(cfg, 3);
    for (int i = 0; i < cfg.n; ++i) {
      CHECK_FALSE(in_upper_quadrant(d.train.locations.row(i)));
      CHECK_FALSE(in_upper_quadrant(d.interp.locations.row(i)));
      CHECK(in_upper_quadrant(d.extrap.locations.row(i)));
      CHECK(d.train.y[i] >= 0.0);
      CHECK(d.train.y[i] == std::round(d.train.y[i]));
    }
    CHECK((d.train.locations.array() >= 0.0).all());
    CHECK((d.extrap.locations.array() <= 1.0).all());
  }

  TEST_CASE("GP effects have the exponential covariance") {
    MatrixXd s(2, 2);
    s << 0.2, 0.2, 0.3, 0.2;
    const int reps = 200;
    double cov = 0.0, v0 = 0.0;
    for (int r = 0; r < reps; ++r) {
      Rng rng(99, r);
      const VectorXd b = draw_gp_effects(s, 1.0, 0.1, rng);
      cov += b[0] * b[1];
      v0 += b[0] * b[0];
    }
    // about three Monte Carlo standard errors
    CHECK(std::abs(cov / reps - std::exp(-1.0)) < 0.25);
    CHECK(std::abs(v0 / reps - 1.0) < 0.3);
  }

  TEST_CASE("datasets are reproducible per replicate") {
    SimConfig cfg = default_sim_config(Scenario::SpatialBinary);
    cfg.n = 60;
    const auto a = gen_dataset(cfg, 4), b = gen_dataset(cfg, 4), c = gen_dataset(cfg, 5);
    CHECK(a.train.X == b.train.X);
    CHECK(a.train.y == b.train.y);
    CHECK(a.extrap.locations == b.extrap.locations);
    CHECK(a.train.X != c.train.X);
  }

  TEST_CASE("invalid configurations") {
    SimConfig cfg;
    cfg.n = 0;
    CHECK_THROWS(validate(cfg));
    cfg = default_sim_config(Scenario::GroupedBinary);
    cfg.samples_per_group = 0;
    CHECK_THROWS(validate(cfg));
    cfg = default_sim_config(Scenario::SpatialBinary);
    cfg.rho = -1.0;
    CHECK_THROWS(validate(cfg));
  }
}
