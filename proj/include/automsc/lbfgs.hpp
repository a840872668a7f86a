#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace automsc {

enum class LbfgsStatus {
  Converged,          // gradient max-norm <= tolerance
  MaxIterations,      // iteration budget exhausted
  LineSearchFailed,   // no step satisfied the sufficient-decrease condition
  NonFinite,          // objective or gradient stopped being finite
};

template <typename Scalar>
struct LbfgsOptions {
  /// Stop when max_i |g_i| <= tolerance.
  Scalar tolerance = Scalar(1e-4);
  int max_iterations = 100;
  /// Number of (s, y) correction pairs kept.
  int memory = 10;
  /// Sufficient-decrease constant c1 in f(x + a d) <= f(x) + c1 a g'd.
  Scalar armijo = Scalar(1e-4);
  /// Step shrink factor during backtracking.
  Scalar backtrack = Scalar(0.5);
  int max_backtracks = 40;
};

template <typename Scalar>
struct LbfgsResult {
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  int iterations = 0;
  int evaluations = 0;
  Scalar value = Scalar(0);
  Scalar gradient_max_norm = Scalar(0);
  /// Objective at the start point followed by the value after each accepted step.
  std::vector<Scalar> history;

  bool converged() const noexcept { return status == LbfgsStatus::Converged; }
};

/// Minimizes `objective` starting from `x`, which holds the solution on
/// return. `objective(x, grad)` returns f(x) and writes the gradient into
/// `grad` (already sized like x).
///
/// Uses the two-loop recursion for the search direction and a backtracking
/// line search on the Armijo condition. Pairs with non-positive curvature
/// s'y are discarded so the implicit inverse Hessian stays positive
/// definite and every direction is a descent direction.
template <typename Scalar, typename Objective>
LbfgsResult<Scalar> lbfgs_minimize(Objective&& objective,
                                   Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                                   const LbfgsOptions<Scalar>& options = {}) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  struct Correction {
    Vector s;
    Vector y;
    Scalar rho;
  };

  LbfgsResult<Scalar> result;
  const Eigen::Index n = x.size();
  Vector g(n);
  Scalar f = objective(static_cast<const Vector&>(x), g);
  ++result.evaluations;
  result.history.push_back(f);

  auto finite = [](Scalar value, const Vector& grad) {
    return std::isfinite(value) && grad.allFinite();
  };
  auto finish = [&](LbfgsStatus status) {
    result.status = status;
    result.value = f;
    result.gradient_max_norm = n > 0 ? g.cwiseAbs().maxCoeff() : Scalar(0);
    return result;
  };

  if (!finite(f, g)) return finish(LbfgsStatus::NonFinite);
  if (n == 0 || g.cwiseAbs().maxCoeff() <= options.tolerance) return finish(LbfgsStatus::Converged);

  std::deque<Correction> history;
  std::vector<Scalar> alpha;
  Vector d(n), x_new(n), g_new(n);

  while (result.iterations < options.max_iterations) {
    // Two-loop recursion: d = -H g.
    d = -g;
    alpha.assign(history.size(), Scalar(0));
    for (std::size_t i = history.size(); i-- > 0;) {
      alpha[i] = history[i].rho * history[i].s.dot(d);
      d.noalias() -= alpha[i] * history[i].y;
    }
    Scalar step = Scalar(1);
    if (!history.empty()) {
      const auto& last = history.back();
      d *= last.s.dot(last.y) / last.y.squaredNorm();
    } else {
      // Without curvature information, take a unit-length first trial step.
      step = Scalar(1) / g.norm();
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      const Scalar beta = history[i].rho * history[i].y.dot(d);
      d.noalias() += (alpha[i] - beta) * history[i].s;
    }

    Scalar slope = g.dot(d);
    if (!(slope < Scalar(0))) {
      // Lost descent (numerical trouble); restart from steepest descent.
      history.clear();
      d = -g;
      slope = -g.squaredNorm();
      step = Scalar(1) / g.norm();
    }

    bool accepted = false;
    Scalar f_new = f;
    for (int k = 0; k <= options.max_backtracks; ++k) {
      x_new = x + step * d;
      f_new = objective(static_cast<const Vector&>(x_new), g_new);
      ++result.evaluations;
      if (std::isfinite(f_new) && f_new <= f + options.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= options.backtrack;
    }
    if (!accepted) return finish(LbfgsStatus::LineSearchFailed);
    if (!g_new.allFinite()) return finish(LbfgsStatus::NonFinite);

    Correction c{x_new - x, g_new - g, Scalar(0)};
    const Scalar sy = c.s.dot(c.y);
    if (sy > std::numeric_limits<Scalar>::epsilon() * c.y.squaredNorm()) {
      c.rho = Scalar(1) / sy;
      history.push_back(std::move(c));
      if (static_cast<int>(history.size()) > options.memory) history.pop_front();
    }

    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    ++result.iterations;
    result.history.push_back(f);

    if (g.cwiseAbs().maxCoeff() <= options.tolerance) return finish(LbfgsStatus::Converged);
  }
  return finish(LbfgsStatus::MaxIterations);
}

}  // namespace automsc
