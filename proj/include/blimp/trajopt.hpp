#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace blimp::trajopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Named, contiguous segments of a flat decision vector.
class DecisionLayout {
 public:
  struct Segment {
    std::string name;
    int offset = 0;
    int size = 0;
  };

  /// Appends a segment and returns its offset.
  int add(std::string name, int size);
  const Segment& segment(const std::string& name) const;
  const std::vector<Segment>& segments() const { return segments_; }
  int size() const { return size_; }

 private:
  std::vector<Segment> segments_;
  int size_ = 0;
};

using ResidualFn = std::function<Vector(const Vector&)>;

struct Jacobian {
  Matrix matrix;
  std::vector<int> flagged;  // columns whose perturbed residual was not finite
};

/// Jacobian callback: point and the residual already evaluated there.
using JacobianFn = std::function<Jacobian(const Vector&, const Vector&)>;

/// Stacked weighted residuals with box bounds. The cost is the squared norm
/// of the residual.
struct ResidualProblem {
  ResidualFn residual;
  JacobianFn jacobian;  // optional; forward differences when empty
  Vector lower;
  Vector upper;
  Vector initial;

  /// Throws std::invalid_argument on size mismatches or lower > upper.
  void validate() const;
};

struct IterationTrace {
  int iteration = 0;
  double cost = 0.0;
  double damping = 0.0;
  double step_norm = 0.0;
};

struct SolveOptions {
  int max_iterations = 50;
  double step_tolerance = 1e-10;
  double cost_tolerance = 1e-12;
  double initial_damping = 1e-3;
  std::function<void(const IterationTrace&)> trace;
};

struct SolveReport {
  Vector solution;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  double optimality = 0.0;  // infinity norm of the projected gradient
  std::string termination;
};

/// Raised when the initial guess yields a non-finite cost.
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// sqrt(P) z for a diagonal P; rows with zero weight are dropped.
/// Throws std::invalid_argument on negative weights or size mismatch.
Vector weightedResidual(const Vector& z, const Vector& weights);

/// Forward-difference step for coordinate value x.
double differenceStep(double x);

/// Forward differences, columns evaluated in parallel when not already
/// inside a parallel region. Steps flip sign at an upper bound.
Jacobian jacobian(const ResidualProblem& problem, const Vector& x, const Vector& r0);

/// Serial reference for jacobian(); produces identical output.
Jacobian jacobianSerial(const ResidualProblem& problem, const Vector& x, const Vector& r0);

/// Central differences, used to check the forward-difference contract.
Matrix centralJacobian(const ResidualFn& residual, const Vector& x);

/// Box-constrained damped Gauss-Newton (Levenberg) with projected steps and
/// Armijo backtracking on the true cost.
SolveReport solve(const ResidualProblem& problem, const SolveOptions& options = {});

}  // namespace blimp::trajopt
