#include "gdm/optimizer.hpp"

#include "gdm/kernel.hpp"

#include <cmath>
#include <limits>

namespace gdm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kArmijo = 1e-4;
constexpr double kCurvature = 0.9;

struct Probe {
  double alpha = 0.0;
  double f = kInf;
  double slope = 0.0;  // directional derivative
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

class LineSearch {
 public:
  LineSearch(const Objective& objective, int& evaluations)
      : objective_(objective), evaluations_(evaluations) {}

  Probe at(const Eigen::VectorXd& x, const Eigen::VectorXd& d, double alpha) {
    Probe p;
    p.alpha = alpha;
    p.x = x + alpha * d;
    p.g.resize(x.size());
    ++evaluations_;
    try {
      p.f = objective_(p.x, &p.g);
    } catch (const NonFiniteUtility&) {
      p.f = kInf;
    }
    if (!std::isfinite(p.f) || !p.g.allFinite()) {
      p.f = kInf;
      p.slope = 0.0;
    } else {
      p.slope = p.g.dot(d);
    }
    return p;
  }

  // Returns the accepted probe, or a probe with alpha == 0 on failure.
  Probe search(const Eigen::VectorXd& x, double f0, double slope0, const Eigen::VectorXd& d,
               double alpha0) {
    const double slack = 1e-13 * (1.0 + std::abs(f0));
    auto armijo = [&](const Probe& p) { return p.f <= f0 + kArmijo * p.alpha * slope0 + slack; };
    auto curvature = [&](const Probe& p) { return std::abs(p.slope) <= -kCurvature * slope0; };

    Probe prev;
    prev.alpha = 0.0;
    prev.f = f0;
    prev.slope = slope0;
    double alpha = alpha0;
    Probe best;
    for (int i = 0; i < 40; ++i) {
      Probe cur = at(x, d, alpha);
      if (cur.f < best.f) best = cur;
      if (!std::isfinite(cur.f)) {
        alpha = 0.5 * (prev.alpha + alpha);
        if (alpha - prev.alpha < 1e-16) break;
        continue;
      }
      if (!armijo(cur) || (i > 0 && cur.f >= prev.f)) return zoom(x, d, f0, slope0, prev, cur, best);
      if (curvature(cur)) return cur;
      if (cur.slope >= 0) return zoom(x, d, f0, slope0, cur, prev, best);
      prev = cur;
      alpha *= 2.0;
    }
    return fallback(best, f0);
  }

 private:
  Probe zoom(const Eigen::VectorXd& x, const Eigen::VectorXd& d, double f0, double slope0,
             Probe lo, Probe hi, Probe best) {
    const double slack = 1e-13 * (1.0 + std::abs(f0));
    for (int i = 0; i < 40; ++i) {
      double alpha = cubic_min(lo, hi);
      const double a = std::min(lo.alpha, hi.alpha), b = std::max(lo.alpha, hi.alpha);
      const double margin = 0.1 * (b - a);
      if (!std::isfinite(alpha) || alpha < a + margin || alpha > b - margin) alpha = 0.5 * (a + b);
      if (b - a < 1e-14 * std::max(1.0, b)) break;
      Probe cur = at(x, d, alpha);
      if (cur.f < best.f) best = cur;
      if (!std::isfinite(cur.f) || cur.f > f0 + kArmijo * alpha * slope0 + slack || cur.f >= lo.f) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.slope) <= -kCurvature * slope0) return cur;
        if (cur.slope * (hi.alpha - lo.alpha) >= 0) hi = lo;
        lo = std::move(cur);
      }
    }
    return fallback(best, f0);
  }

  static Probe fallback(const Probe& best, double f0) {
    if (best.alpha > 0 && best.f < f0) return best;
    return Probe{};
  }

  static double cubic_min(const Probe& p, const Probe& q) {
    if (!std::isfinite(p.f) || !std::isfinite(q.f)) return std::numeric_limits<double>::quiet_NaN();
    const double h = q.alpha - p.alpha;
    const double d1 = p.slope + q.slope - 3.0 * (p.f - q.f) / (p.alpha - q.alpha);
    const double disc = d1 * d1 - p.slope * q.slope;
    if (disc < 0) return std::numeric_limits<double>::quiet_NaN();
    const double d2 = std::copysign(std::sqrt(disc), h);
    return q.alpha - h * (q.slope + d2 - d1) / (q.slope - p.slope + 2.0 * d2);
  }

  const Objective& objective_;
  int& evaluations_;
};

}  // namespace

BfgsResult minimize_bfgs(const Objective& objective, const Eigen::VectorXd& x0, const BfgsOptions& options) {
  BfgsResult res;
  const Eigen::Index n = x0.size();
  res.x = x0;
  res.gradient.resize(n);
  res.f = objective(res.x, &res.gradient);
  res.evaluations = 1;
  if (!std::isfinite(res.f) || !res.gradient.allFinite()) {
    res.f = kInf;
    res.message = "non-finite objective at start";
    return res;
  }
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  int failures = 0;
  LineSearch ls(objective, res.evaluations);
  Eigen::VectorXd best_x = res.x, best_g = res.gradient;
  double best_f = res.f;
  while (true) {
    if (res.gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      break;
    }
    if (res.iterations >= options.max_iterations) {
      res.message = "iteration limit reached";
      break;
    }
    Eigen::VectorXd d = -H * res.gradient;
    double slope = d.dot(res.gradient);
    if (!(slope < 0)) {
      H.setIdentity();
      scaled = false;
      d = -res.gradient;
      slope = d.dot(res.gradient);
    }
    const double dmax = d.lpNorm<Eigen::Infinity>();
    const double alpha0 = dmax > options.max_step ? options.max_step / dmax : 1.0;
    Probe step = ls.search(res.x, res.f, slope, d, alpha0);
    if (step.alpha == 0.0) {
      if (++failures >= 2 || H.isIdentity()) {
        res.message = "line search could not make progress";
        break;
      }
      H.setIdentity();
      scaled = false;
      continue;
    }
    failures = 0;
    const Eigen::VectorXd s = step.x - res.x;
    const Eigen::VectorXd y = step.g - res.gradient;
    res.x = std::move(step.x);
    res.f = step.f;
    res.gradient = std::move(step.g);
    ++res.iterations;
    if (res.f < best_f) {
      best_f = res.f;
      best_x = res.x;
      best_g = res.gradient;
    }
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      const double yHy = y.dot(Hy);
      H += (rho * rho * yHy + rho) * s * s.transpose() - rho * (Hy * s.transpose() + s * Hy.transpose());
    }
  }
  if (best_f < res.f) {
    res.x = best_x;
    res.f = best_f;
    res.gradient = best_g;
    res.converged = res.gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance;
  }
  return res;
}

}  // namespace gdm
