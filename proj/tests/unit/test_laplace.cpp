#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lagaboost/laplace.hpp"
#include "lagaboost/rng.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace lagaboost;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr auto kProbit = LikelihoodKind::BernoulliProbit;
constexpr auto kPoisson = LikelihoodKind::PoissonLog;

NewtonSettings tight() {
  NewtonSettings s;
  // objective changes sit below rounding long before the mode is exact, so
  // only the step criterion is used here
  s.objective_tol = -1.0;
  s.step_tol = 1e-14;
  s.max_iterations = 200;
  return s;
}

using oracle::gp_instance;
using oracle::grouped_instance;
using oracle::Instance;

double nll_at(const LatentModel& model, const ThetaVector& theta, const VectorXd& F) {
  const auto st = find_mode(model, theta, F, nullptr, tight());
  REQUIRE(st.converged);
  return st.nll;
}

void check_against_dense(LikelihoodKind kind, const Instance& in, double tol) {
  const LatentModel model({kind, {}}, in.y, in.structure);
  const auto st = find_mode(model, in.theta, in.F, nullptr, tight());
  REQUIRE(st.converged);
  const auto dense = oracle::dense_laplace(kind, in.y, in.F, in.Z, in.Sigma, in.dSigma);
  REQUIRE(dense.converged);
  CHECK(oracle::max_rel_err(st.mode, dense.mode, 1.0) < tol);
  CHECK(oracle::rel_err(laplace_nll(model, st), dense.nll, 1.0) < tol);
  CHECK(oracle::max_rel_err(grad_F(model, st), dense.grad_F, 1.0) < tol);
  CHECK(oracle::max_rel_err(grad_theta(model, st), dense.grad_log_theta, 1.0) < tol);
  CHECK(oracle::max_rel_err(posterior_variance_diag(st), dense.posterior_cov.diagonal(), 1.0) < tol);
}

}  // namespace

TEST_SUITE("laplace") {
  TEST_CASE("poisson responses equal to exp(F) give a zero mode") {
    VectorXd F(6);
    F << 0.0, std::log(2.0), std::log(3.0), 0.0, std::log(5.0), std::log(2.0);
    const VectorXd y = F.array().exp().round();
    const LatentModel grouped({kPoisson, {}}, y, GroupedStructure({0, 0, 1, 1, 2, 2}, 3));
    const auto a = find_mode(grouped, ThetaVector::from_natural(VectorXd::Constant(1, 1.3)), F);
    CHECK(a.mode.cwiseAbs().maxCoeff() < 1e-12);
    MatrixXd s(6, 2);
    s << 0, 0, 0.1, 0, 0.2, 0.3, 0.5, 0.5, 0.9, 0.1, 0.4, 0.8;
    const LatentModel gp({kPoisson, {}}, y, GpStructure(s));
    const auto b = find_mode(gp, ThetaVector::from_natural(Eigen::Vector2d(1.0, 0.2)), F);
    CHECK(b.mode.cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("single-group probit mode matches a golden-section maximizer") {
    VectorXd y(5), F(5);
    y << 1, 0, 1, 1, 0;
    F << 0.3, -0.2, 0.1, 0.8, -0.5;
    const double sigma2 = 0.7;
    const LatentModel model({kProbit, {}}, y, GroupedStructure({0, 0, 0, 0, 0}, 1));
    const auto st = find_mode(model, ThetaVector::from_natural(VectorXd::Constant(1, sigma2)), F);
    const double want = oracle::golden_max(
        [&](double b) { return log_density({kProbit, {}}, y, (F.array() + b).matrix()) - b * b / (2.0 * sigma2); },
        -10.0, 10.0);
    CHECK(std::abs(st.mode[0] - want) < 1e-6);
    CHECK(st.converged);
  }

  TEST_CASE("warm start needs fewer Newton iterations than a cold start") {
    const auto in = grouped_instance(kProbit, 400, 40, 1.0, 5);
    const LatentModel model({kProbit, {}}, in.y, in.structure);
    const auto first = find_mode(model, in.theta, in.F);
    Rng rng(9);
    const VectorXd F2 = in.F + 0.01 * VectorXd::NullaryExpr(in.F.size(), [&] { return rng.normal(); });
    const auto cold = find_mode(model, in.theta, F2);
    const auto warm = find_mode(model, in.theta, F2, &first);
    CHECK(warm.converged);
    CHECK(warm.newton_iters < cold.newton_iters);
    CHECK(std::abs(warm.nll - cold.nll) < 1e-7);
  }

  TEST_CASE("flat likelihood has no log-determinant term") {
    VectorXd slope(4);
    slope << 0.5, -1.0, 0.25, 2.0;
    const LogLikelihoodFn flat = [slope](const VectorXd& mu) {
      LogDensityDerivatives d;
      d.d0 = slope.cwiseProduct(mu);
      d.d1 = slope;
      d.d2 = VectorXd::Zero(mu.size());
      d.d3 = VectorXd::Zero(mu.size());
      return d;
    };
    const double sigma2 = 1.5;
    const LatentModel model(flat, 4, GroupedStructure({0, 1, 1, 0}, 2));
    VectorXd F(4);
    F << 0.1, 0.2, 0.3, 0.4;
    const auto st = find_mode(model, ThetaVector::from_natural(VectorXd::Constant(1, sigma2)), F);
    const VectorXd mode_want = sigma2 * Eigen::Vector2d(slope[0] + slope[3], slope[1] + slope[2]);
    CHECK((st.mode - mode_want).cwiseAbs().maxCoeff() < 1e-12);
    const double want = -st.derivs.d0.sum() + 0.5 * st.mode.squaredNorm() / sigma2;
    CHECK(laplace_nll(model, st) == doctest::Approx(want).epsilon(1e-14));
  }

  TEST_CASE("grouped sparse path equals the dense evaluation") {
    for (auto kind : {kProbit, kPoisson}) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        CAPTURE(seed);
        check_against_dense(kind, grouped_instance(kind, 9, 3, 0.8, seed), 1e-10);
      }
    }
  }

  TEST_CASE("GP Woodbury path equals the dense evaluation") {
    for (auto kind : {kProbit, kPoisson}) {
      for (int n : {10, 25, 40}) {
        CAPTURE(n);
        check_against_dense(kind, gp_instance(kind, n, 1.0, 0.2, 100 + n), 1e-8);
      }
    }
  }

  TEST_CASE("Laplace value is close to the exact poisson marginal") {
    Instance in = grouped_instance(kPoisson, 30, 5, 0.5, 21);
    in.F.setConstant(2.3);
    Rng rng(22);
    const auto& idx = std::get<GroupedStructure>(in.structure).group_index();
    const VectorXd b = VectorXd::NullaryExpr(5, [&] { return std::sqrt(0.5) * rng.normal(); });
    for (int i = 0; i < 30; ++i) in.y[i] = std::max(5.0, static_cast<double>(rng.poisson(std::exp(2.3 + b[idx[i]]))));
    const LatentModel model({kPoisson, {}}, in.y, in.structure);
    const double la = nll_at(model, in.theta, in.F);
    const double exact = oracle::exact_grouped_nll(kPoisson, in.y, in.F, idx, 5, 0.5);
    CHECK(std::abs(la - exact) / std::abs(exact) < 0.02);
  }

  TEST_CASE("grad_F matches finite differences") {
    constexpr double h = 1e-5;
    constexpr double tol = 1e-4;
    SUBCASE("grouped probit n=20") {
      const auto in = grouped_instance(kProbit, 20, 4, 1.0, 31);
      const LatentModel model({kProbit, {}}, in.y, in.structure);
      const auto st = find_mode(model, in.theta, in.F, nullptr, tight());
      const VectorXd fd = oracle::fd_gradient([&](const VectorXd& F) { return nll_at(model, in.theta, F); }, in.F, h);
      CHECK(oracle::max_rel_err(grad_F(model, st), fd) < tol);
    }
    SUBCASE("GP poisson n=15") {
      const auto in = gp_instance(kPoisson, 15, 1.0, 0.3, 32);
      const LatentModel model({kPoisson, {}}, in.y, in.structure);
      const auto st = find_mode(model, in.theta, in.F, nullptr, tight());
      const VectorXd fd = oracle::fd_gradient([&](const VectorXd& F) { return nll_at(model, in.theta, F); }, in.F, h);
      CHECK(oracle::max_rel_err(grad_F(model, st), fd) < tol);
    }
  }

  TEST_CASE("exchangeable observations get equal gradients") {
    VectorXd y(6), F(6);
    y << 1, 1, 1, 0, 1, 0;
    F << 0.2, 0.2, 0.2, -0.1, 0.4, 0.0;
    const LatentModel model({kProbit, {}}, y, GroupedStructure({0, 0, 0, 1, 1, 0}, 2));
    const auto st = find_mode(model, ThetaVector::from_natural(VectorXd::Constant(1, 1.0)), F);
    const VectorXd g = grad_F(model, st);
    CHECK(g[0] == doctest::Approx(g[1]).epsilon(1e-14));
    CHECK(g[1] == doctest::Approx(g[2]).epsilon(1e-14));
  }

  TEST_CASE("grad_theta matches finite differences in log theta") {
    constexpr double h = 1e-5;
    constexpr double tol = 1e-4;
    SUBCASE("grouped n=50 m=10") {
      for (auto kind : {kProbit, kPoisson}) {
        const auto in = grouped_instance(kind, 50, 10, 0.9, 41);
        const LatentModel model({kind, {}}, in.y, in.structure);
        const auto st = find_mode(model, in.theta, in.F, nullptr, tight());
        const VectorXd fd = oracle::fd_gradient(
            [&](const VectorXd& lt) { return nll_at(model, ThetaVector(lt), in.F); }, in.theta.log_values, h);
        CHECK(oracle::max_rel_err(grad_theta(model, st), fd) < tol);
      }
    }
    SUBCASE("GP n=30") {
      for (auto kind : {kProbit, kPoisson}) {
        const auto in = gp_instance(kind, 30, 1.2, 0.25, 42);
        const LatentModel model({kind, {}}, in.y, in.structure);
        const auto st = find_mode(model, in.theta, in.F, nullptr, tight());
        const VectorXd fd = oracle::fd_gradient(
            [&](const VectorXd& lt) { return nll_at(model, ThetaVector(lt), in.F); }, in.theta.log_values, h);
        CHECK(oracle::max_rel_err(grad_theta(model, st), fd) < tol);
      }
    }
  }

  TEST_CASE("Gaussian likelihood gives the exact marginal") {
    static constexpr double tau2 = 0.6;
    const auto in = gp_instance(kProbit, 12, 1.1, 0.3, 51);
    Rng rng(52);
    const VectorXd y = in.F + VectorXd::NullaryExpr(12, [&] { return rng.normal(); });
    const LogLikelihoodFn gauss = [y](const VectorXd& mu) {
      LogDensityDerivatives d;
      const VectorXd r = y - mu;
      d.d0 = (-0.5 * r.array().square() / tau2 - 0.5 * std::log(2.0 * std::numbers::pi * tau2)).matrix();
      d.d1 = r / tau2;
      d.d2 = VectorXd::Constant(mu.size(), -1.0 / tau2);
      d.d3 = VectorXd::Zero(mu.size());
      return d;
    };
    for (int which = 0; which < 2; ++which) {
      LatentStructure s;
      MatrixXd C;
      ThetaVector theta;
      if (which == 0) {
        s = in.structure;
        theta = in.theta;
        C = in.Sigma;
      } else {
        std::vector<int> idx = {0, 0, 1, 1, 1, 2, 2, 3, 3, 3, 3, 0};
        s = GroupedStructure(idx, 4);
        theta = ThetaVector::from_natural(VectorXd::Constant(1, 0.8));
        const MatrixXd Z = oracle::incidence(idx, 4);
        C = 0.8 * Z * Z.transpose();
      }
      C.diagonal().array() += tau2;
      const LatentModel model(gauss, 12, s);
      const auto st = find_mode(model, theta, in.F, nullptr, tight());
      const VectorXd r = y - in.F;
      const Eigen::LLT<MatrixXd> llt(C);
      const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      const double want = 0.5 * r.dot(llt.solve(r)) + 0.5 * logdet + 6.0 * std::log(2.0 * std::numbers::pi);
      CHECK(std::abs(laplace_nll(model, st) - want) < 1e-8);
    }
  }

  TEST_CASE("Newton objective never decreases") {
    for (auto kind : {kProbit, kPoisson}) {
      const auto in = grouped_instance(kind, 200, 20, 2.0, 61);
      const auto gp = gp_instance(kind, 30, 2.0, 0.3, 62);
      for (const Instance* inst : {&in, &gp}) {
        const LatentModel model({kind, {}}, inst->y, inst->structure);
        double prev = -INFINITY;
        for (int k = 1; k <= 8; ++k) {
          NewtonSettings s = tight();
          s.max_iterations = k;
          const auto st = find_mode(model, inst->theta, inst->F, nullptr, s);
          // full steps below the rounding floor may lose a few ulps
          CHECK(st.objective >= prev - 1e-13 * std::abs(prev));
          prev = st.objective;
        }
      }
    }
  }

  TEST_CASE("converged states are stationary with nonnegative weights") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      for (auto kind : {kProbit, kPoisson}) {
        const auto a = grouped_instance(kind, 100, 10, 1.0, seed);
        const auto b = gp_instance(kind, 25, 1.0, 0.2, seed);
        for (const Instance* inst : {&a, &b}) {
          const LatentModel model({kind, {}}, inst->y, inst->structure);
          const auto st = find_mode(model, inst->theta, inst->F);
          REQUIRE(st.converged);
          CHECK(st.stationarity_residual(model) <= 1e-6);
          CHECK((st.w_tilde.array() >= 0.0).all());
          CHECK((posterior_variance_diag(st).array() > 0.0).all());
          CHECK(st.nll == laplace_nll(model, st));
        }
      }
    }
  }

  TEST_CASE("invalid arguments") {
    const auto in = grouped_instance(kProbit, 10, 2, 1.0, 71);
    const LatentModel model({kProbit, {}}, in.y, in.structure);
    CHECK_THROWS_AS(find_mode(model, in.theta, VectorXd::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(find_mode(model, in.theta, VectorXd::Constant(10, NAN)), std::invalid_argument);
    CHECK_THROWS_AS(find_mode(model, ThetaVector(VectorXd::Zero(2)), in.F), std::invalid_argument);
    CHECK_THROWS_AS(LatentModel({kProbit, {}}, VectorXd::Zero(3), in.structure), std::invalid_argument);
    CHECK_THROWS_AS(LatentModel({kProbit, {}}, VectorXd::Constant(10, 2.0), in.structure), std::domain_error);
  }
}
