#pragma once

#include <Eigen/Core>
#include <functional>

namespace invctl {

/// Objective for the optimizer: returns the loss at w and, when grad is not
/// null, writes the gradient into it.
using ScgObjective = std::function<double(const Eigen::VectorXd& w, Eigen::VectorXd* grad)>;

struct ScgOptions {
    double sigma = 1e-4;    ///< perturbation scale for the Hessian-vector estimate
    double lambda0 = 1e-6;  ///< initial trust-region damping
    int max_iterations = 2000;
    double grad_tolerance = 0.0;  ///< stop when the gradient norm falls below this
};

struct ScgIterate {
    int iteration = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    bool step_accepted = false;
};

/// Called after each iteration; return false to stop.
using ScgCallback = std::function<bool(const ScgIterate&, const Eigen::VectorXd& w)>;

struct ScgResult {
    Eigen::VectorXd w;
    double loss = 0.0;
    int iterations = 0;
};

/// Scaled conjugate gradient minimization: conjugate directions with a
/// finite-difference Hessian-vector estimate along the search direction and
/// Levenberg-Marquardt style damping. No line search. Throws
/// std::runtime_error if the objective is non-finite at the starting point
/// or after an accepted step.
ScgResult scg_minimize(const ScgObjective& objective, Eigen::VectorXd w0,
                       const ScgOptions& options, const ScgCallback& callback = {});

}  // namespace invctl
