#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace omx {

struct SolverOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-10;      // relative parameter step
    double residual_tolerance = 1e-12;  // relative change of the squared residual
    int max_halvings = 50;
    bool scale_covariance = true;       // multiply by residual variance
};

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd values;
    Eigen::MatrixXd covariance; // empty unless converged
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
    std::string message;
    std::vector<std::string> frozen; // parameters dropped for a singular Jacobian

    std::size_t index(std::string_view name) const;
    double value(std::string_view name) const;
    // NaN when no covariance is available.
    double stderr_of(std::string_view name) const;
};

// Fills residuals (size m) and, when non-null, the m x n Jacobian d r / d p.
using ResidualFunction =
    std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals, Eigen::MatrixXd* jacobian)>;

struct LeastSquaresProblem {
    std::vector<std::string> names;
    std::size_t residual_count = 0;
    ResidualFunction residuals;
    Eigen::VectorXd lower; // empty = unbounded
    Eigen::VectorXd upper;
};

// Gauss-Newton with step halving; bounds are enforced by projection with
// bound-active parameters held for the iteration. Parameters should be O(1).
FitResult solve_least_squares(const LeastSquaresProblem& problem, Eigen::VectorXd initial,
                              const SolverOptions& options = {});

} // namespace omx
