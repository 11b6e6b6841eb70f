#include "blimp/trajopt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <omp.h>

namespace blimp::trajopt {

int DecisionLayout::add(std::string name, int size) {
  if (size <= 0) throw std::invalid_argument("segment size must be positive");
  for (const auto& s : segments_) {
    if (s.name == name) throw std::invalid_argument("duplicate segment: " + name);
  }
  const int offset = size_;
  segments_.push_back({std::move(name), offset, size});
  size_ += size;
  return offset;
}

const DecisionLayout::Segment& DecisionLayout::segment(const std::string& name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("no segment named " + name);
}

void ResidualProblem::validate() const {
  if (!residual) throw std::invalid_argument("residual function is empty");
  const auto n = initial.size();
  if (lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("bounds and initial guess differ in size");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(lower[i] <= upper[i])) throw std::invalid_argument("lower bound exceeds upper");
  }
}

Vector weightedResidual(const Vector& z, const Vector& weights) {
  if (z.size() != weights.size()) throw std::invalid_argument("weight size mismatch");
  Vector out(z.size());
  Eigen::Index rows = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (weights[i] < 0.0) throw std::invalid_argument("negative weight");
    if (weights[i] == 0.0) continue;
    out[rows++] = std::sqrt(weights[i]) * z[i];
  }
  out.conservativeResize(rows);
  return out;
}

double differenceStep(double x) { return 1e-6 * (1.0 + std::abs(x)); }

namespace {

void fillColumn(const ResidualProblem& problem, const Vector& x, const Vector& r0,
                Eigen::Index col, Matrix& out, std::vector<char>& bad) {
  Vector xp = x;
  double h = differenceStep(x[col]);
  if (x[col] + h > problem.upper[col]) h = -h;
  xp[col] += h;
  Vector r;
  bool ok = true;
  try {
    r = problem.residual(xp);
    ok = r.size() == r0.size() && r.allFinite();
  } catch (const std::exception&) {
    ok = false;
  }
  if (ok) {
    out.col(col) = (r - r0) / h;
  } else {
    out.col(col).setZero();
    bad[col] = 1;
  }
}

Jacobian collect(Matrix matrix, const std::vector<char>& bad) {
  Jacobian j{std::move(matrix), {}};
  for (std::size_t i = 0; i < bad.size(); ++i) {
    if (bad[i]) j.flagged.push_back(static_cast<int>(i));
  }
  return j;
}

double cost(const Vector& r) { return r.squaredNorm(); }

bool evaluate(const ResidualProblem& problem, const Vector& x, Eigen::Index rows, Vector& r) {
  try {
    r = problem.residual(x);
  } catch (const std::exception&) {
    return false;
  }
  return r.size() == rows && r.allFinite();
}

Vector project(const Vector& x, const Vector& lower, const Vector& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace

Jacobian jacobianSerial(const ResidualProblem& problem, const Vector& x, const Vector& r0) {
  const Eigen::Index n = x.size();
  Matrix out(r0.size(), n);
  std::vector<char> bad(n, 0);
  for (Eigen::Index col = 0; col < n; ++col) fillColumn(problem, x, r0, col, out, bad);
  return collect(std::move(out), bad);
}

Jacobian jacobian(const ResidualProblem& problem, const Vector& x, const Vector& r0) {
  const Eigen::Index n = x.size();
  Matrix out(r0.size(), n);
  std::vector<char> bad(n, 0);
#pragma omp parallel for schedule(dynamic) if (!omp_in_parallel() && n > 1)
  for (Eigen::Index col = 0; col < n; ++col) fillColumn(problem, x, r0, col, out, bad);
  return collect(std::move(out), bad);
}

Matrix centralJacobian(const ResidualFn& residual, const Vector& x) {
  const Vector r0 = residual(x);
  Matrix out(r0.size(), x.size());
  for (Eigen::Index col = 0; col < x.size(); ++col) {
    const double h = 1e-5 * (1.0 + std::abs(x[col]));
    Vector xp = x, xm = x;
    xp[col] += h;
    xm[col] -= h;
    out.col(col) = (residual(xp) - residual(xm)) / (2.0 * h);
  }
  return out;
}

SolveReport solve(const ResidualProblem& problem, const SolveOptions& options) {
  problem.validate();
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 4;
  constexpr int kMaxRejections = 12;
  constexpr double kMaxDamping = 1e12;

  SolveReport report;
  Vector x = project(problem.initial, problem.lower, problem.upper);
  Vector r;
  try {
    r = problem.residual(x);
  } catch (const std::exception& e) {
    throw SolveError(std::string("residual failed at initial guess: ") + e.what());
  }
  if (!r.allFinite()) throw SolveError("non-finite cost at initial guess");
  const Eigen::Index rows = r.size();

  double current = cost(r);
  double damping = options.initial_damping;
  report.termination = "max_iterations";

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    report.iterations = iter;
    const Jacobian jac =
        problem.jacobian ? problem.jacobian(x, r) : jacobian(problem, x, r);
    const Matrix& J = jac.matrix;
    const Vector gradient = 2.0 * J.transpose() * r;
    report.optimality =
        (x - project(x - gradient, problem.lower, problem.upper)).lpNorm<Eigen::Infinity>();
    const Matrix normal = J.transpose() * J;
    const Vector rhs = -J.transpose() * r;

    bool accepted = false;
    bool stop = false;
    double step_norm = 0.0;
    double next_cost = current;
    Vector next_x = x, next_r = r;

    for (int attempt = 0; attempt < kMaxRejections && !accepted; ++attempt) {
      Matrix damped = normal;
      damped.diagonal().array() += damping;
      Eigen::LDLT<Matrix> ldlt(damped);
      Vector delta;
      if (ldlt.info() == Eigen::Success) delta = ldlt.solve(rhs);
      if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
        damping = std::min(damping * 10.0, kMaxDamping);
        continue;
      }
      const Vector direction = project(x + delta, problem.lower, problem.upper) - x;
      step_norm = direction.norm();
      if (step_norm < options.step_tolerance) {
        report.converged = true;
        report.termination = "step_tolerance";
        stop = true;
        break;
      }
      const double slope = gradient.dot(direction);
      double t = 1.0;
      for (int k = 0; k <= kMaxBacktracks; ++k, t *= 0.5) {
        const Vector trial = x + t * direction;
        Vector trial_r;
        if (!evaluate(problem, trial, rows, trial_r)) continue;
        const double trial_cost = cost(trial_r);
        if (trial_cost <= current + kArmijo * t * slope && trial_cost <= current) {
          next_x = trial;
          next_r = std::move(trial_r);
          next_cost = trial_cost;
          step_norm *= t;
          accepted = true;
          break;
        }
      }
      if (accepted) {
        damping = std::max(damping / 3.0, 1e-12);
      } else {
        damping = std::min(damping * 10.0, kMaxDamping);
      }
    }

    if (options.trace) options.trace({iter, accepted ? next_cost : current, damping, step_norm});
    if (stop) break;
    if (!accepted) {
      report.termination = "no_descent";
      // A stationary point of the projected problem counts as converged.
      report.converged = report.optimality < 1e-9 * (1.0 + current);
      break;
    }
    const double decrease = current - next_cost;
    x = std::move(next_x);
    r = std::move(next_r);
    current = next_cost;
    if (decrease < options.cost_tolerance) {
      report.converged = true;
      report.termination = "cost_tolerance";
      break;
    }
  }
  report.solution = x;
  report.cost = current;
  return report;
}

}  // namespace blimp::trajopt
