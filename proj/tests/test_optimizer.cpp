#include <doctest.h>

#include "gdm/optimizer.hpp"

using namespace gdm;
using Vec = Eigen::VectorXd;

TEST_CASE("quadratic minimum") {
  Eigen::MatrixXd A(3, 3);
  A << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  Vec b(3);
  b << 1, -2, 0.5;
  const Objective f = [&](const Vec& x, Vec* g) {
    if (g) *g = A * x - b;
    return 0.5 * x.dot(A * x) - b.dot(x);
  };
  const auto r = minimize_bfgs(f, Vec::Zero(3));
  CHECK(r.converged);
  CHECK((r.x - A.ldlt().solve(b)).norm() < 1e-6);
  CHECK(r.gradient.cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("Rosenbrock") {
  const Objective f = [](const Vec& x, Vec* g) {
    const double a = 1 - x(0), b = x(1) - x(0) * x(0);
    if (g) {
      g->resize(2);
      (*g)(0) = -2 * a - 400 * x(0) * b;
      (*g)(1) = 200 * b;
    }
    return a * a + 100 * b * b;
  };
  Vec x0(2);
  x0 << -1.2, 1.0;
  const auto r = minimize_bfgs(f, x0);
  CHECK(r.converged);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("never returns a point worse than the start") {
  int calls = 0;
  const Objective f = [&](const Vec& x, Vec* g) {
    ++calls;
    if (g) *g = Vec::Constant(1, 1.0);
    return x(0) > 0.0 ? std::numeric_limits<double>::infinity() : -x(0) * 0.0;
  };
  const auto r = minimize_bfgs(f, Vec::Zero(1), {1e-5, 20, 5.0});
  CHECK(r.f <= 0.0);
  CHECK(r.x(0) <= 0.0);
  CHECK(calls > 0);
}

TEST_CASE("iteration limit") {
  const Objective f = [](const Vec& x, Vec* g) {
    if (g) *g = 4 * x.array().cube().matrix();
    return x.array().pow(4).sum();
  };
  const auto r = minimize_bfgs(f, Vec::Constant(4, 3.0), {1e-30, 3, 5.0});
  CHECK_FALSE(r.converged);
  CHECK(r.iterations <= 3);
  CHECK(r.f < 4 * 81.0);
}
