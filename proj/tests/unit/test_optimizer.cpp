#include <doctest.h>

#include <cmath>

#include "lagaboost/optimizer.hpp"

using namespace lagaboost;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

SmoothObjective quadratic(const MatrixXd& A, const VectorXd& c) {
  return [A, c](const VectorXd& x, VectorXd* g) {
    const VectorXd r = x - c;
    if (g) *g = A * r;
    return 0.5 * r.dot(A * r);
  };
}

}  // namespace

TEST_SUITE("optimizer") {
  TEST_CASE("stationary start returns after one step") {
    const auto f = quadratic(MatrixXd::Identity(2, 2), VectorXd::Ones(2));
    double lr = 0.0;
    const auto res = nesterov_minimize(f, VectorXd::Ones(2), {}, lr);
    CHECK(res.steps == 1);
    CHECK(res.converged);
    CHECK(res.x == VectorXd::Ones(2));
  }

  TEST_CASE("without momentum the iterates are plain gradient descent") {
    MatrixXd A(2, 2);
    A << 2.0, 0.3, 0.3, 0.5;
    const VectorXd c = Eigen::Vector2d(0.4, -0.2);
    const auto f = quadratic(A, c);
    NesterovSettings s;
    s.momentum = false;
    s.rel_tol = 0.0;
    s.initial_lr = 0.1;
    VectorXd x = Eigen::Vector2d(1.0, 2.0);
    for (int k = 1; k <= 12; ++k) {
      s.max_steps = k;
      double lr = 0.0;
      const auto res = nesterov_minimize(f, Eigen::Vector2d(1.0, 2.0), s, lr);
      x = x - 0.1 * (A * (x - c));
      CHECK(res.x == x);
      CHECK(lr == 0.1);
    }
  }

  TEST_CASE("momentum accelerates an ill-conditioned quadratic and never increases f") {
    MatrixXd A = MatrixXd::Zero(2, 2);
    A.diagonal() << 1.0, 0.05;
    const auto f = quadratic(A, VectorXd::Zero(2));
    NesterovSettings s;
    s.rel_tol = 0.0;
    s.max_steps = 30;
    s.initial_lr = 0.9;
    double lr_a = 0.0, lr_b = 0.0;
    const auto with = nesterov_minimize(f, VectorXd::Ones(2), s, lr_a);
    s.momentum = false;
    const auto without = nesterov_minimize(f, VectorXd::Ones(2), s, lr_b);
    CHECK(with.value < without.value);

    NesterovStepper stepper({});
    VectorXd x = VectorXd::Ones(2);
    VectorXd g;
    double fx = f(x, &g);
    for (int k = 0; k < 20; ++k) {
      const auto out = stepper.step(f, x, fx, g);
      REQUIRE(out.accepted);
      CHECK(out.value <= fx);
      fx = out.value;
      g = out.grad;
    }
  }

  TEST_CASE("increases halve the learning rate and it persists across calls") {
    const auto f = quadratic(MatrixXd::Constant(1, 1, 100.0), VectorXd::Zero(1));
    NesterovSettings s;
    s.max_steps = 1;
    s.max_step = 100.0;
    double lr = 0.0;
    nesterov_minimize(f, VectorXd::Ones(1), s, lr);
    CHECK(lr == 0.0125);
    nesterov_minimize(f, VectorXd::Ones(1), s, lr);
    CHECK(lr == 0.0125);
  }

  TEST_CASE("steps are capped in max-norm") {
    const auto f = quadratic(MatrixXd::Identity(1, 1), VectorXd::Constant(1, 100.0));
    NesterovSettings s;
    s.max_steps = 1;
    s.initial_lr = 0.5;
    double lr = 0.0;
    const auto res = nesterov_minimize(f, VectorXd::Zero(1), s, lr);
    CHECK(res.x[0] == 1.0);
  }

  TEST_CASE("a wrong-signed gradient stalls and keeps the start") {
    const SmoothObjective f = [](const VectorXd& x, VectorXd* g) {
      if (g) *g = -2.0 * x;
      return x.squaredNorm();
    };
    double lr = 0.0;
    const auto res = nesterov_minimize(f, VectorXd::Ones(2), {}, lr);
    CHECK(res.stalled);
    CHECK_FALSE(res.converged);
    CHECK(res.x == VectorXd::Ones(2));
    CHECK(res.value == 2.0);
  }

  TEST_CASE("relative tolerance stops early") {
    const auto f = quadratic(MatrixXd::Identity(1, 1), VectorXd::Zero(1));
    NesterovSettings s;
    s.initial_lr = 1.0;
    s.max_step = 10.0;
    double lr = 0.0;
    const auto res = nesterov_minimize(f, VectorXd::Constant(1, 3.0), s, lr);
    CHECK(res.converged);
    CHECK(res.steps <= 2);
    CHECK(res.value == 0.0);
  }

  TEST_CASE("non-finite start and bad settings throw") {
    const SmoothObjective bad = [](const VectorXd&, VectorXd* g) {
      if (g) *g = VectorXd::Zero(1);
      return NAN;
    };
    double lr = 0.0;
    CHECK_THROWS(nesterov_minimize(bad, VectorXd::Zero(1), {}, lr));
    NesterovSettings s;
    s.max_steps = 0;
    CHECK_THROWS_AS(nesterov_minimize(quadratic(MatrixXd::Identity(1, 1), VectorXd::Zero(1)), VectorXd::Zero(1), s, lr),
                    std::invalid_argument);
  }
}
