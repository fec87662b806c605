#include "invctl/scg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace invctl {

ScgResult scg_minimize(const ScgObjective& objective, Eigen::VectorXd w0,
                       const ScgOptions& options, const ScgCallback& callback) {
    const auto n = w0.size();
    Eigen::VectorXd w = std::move(w0);

    Eigen::VectorXd grad(n);
    double loss = objective(w, &grad);
    if (!std::isfinite(loss)) {
        throw std::runtime_error("scg_minimize: objective non-finite at starting point");
    }

    Eigen::VectorXd r = -grad;   // steepest-descent residual
    Eigen::VectorXd p = r;       // conjugate search direction
    double lambda = options.lambda0;
    double lambda_bar = 0.0;
    bool success = true;

    double delta = 0.0;
    Eigen::VectorXd step_grad(n);
    Eigen::VectorXd s(n);

    ScgResult result;
    int k = 0;
    while (k < options.max_iterations && r.norm() > options.grad_tolerance) {
        ++k;
        // Conjugacy can drift off a descent direction right after an accepted
        // step; fall back to steepest descent then. (When it happens, success
        // is true, so the curvature below is recomputed for the new p.)
        if (p.dot(r) <= 0.0) p = r;
        const double p_norm2 = p.squaredNorm();
        if (p_norm2 == 0.0) break;

        if (success) {
            // Second-order information: directional curvature from a
            // forward-difference of the gradient along p.
            const double sigma_k = options.sigma / std::sqrt(p_norm2);
            objective(w + sigma_k * p, &step_grad);
            s = (step_grad - (-r)) / sigma_k;
            delta = p.dot(s);
        }

        delta += (lambda - lambda_bar) * p_norm2;
        if (delta <= 0.0) {
            // Make the scaled curvature positive definite.
            lambda_bar = 2.0 * (lambda - delta / p_norm2);
            delta = -delta + lambda * p_norm2;
            lambda = lambda_bar;
        }

        const double mu = p.dot(r);
        const double alpha = mu / delta;

        const Eigen::VectorXd w_trial = w + alpha * p;
        const double loss_trial = objective(w_trial, nullptr);
        const double comparison =
            std::isfinite(loss_trial) ? 2.0 * delta * (loss - loss_trial) / (mu * mu)
                                      : -std::numeric_limits<double>::infinity();

        bool accepted = false;
        if (comparison >= 0.0) {
            w = w_trial;
            loss = objective(w, &grad);
            if (!std::isfinite(loss)) {
                throw std::runtime_error("scg_minimize: objective non-finite after accepted step");
            }
            const Eigen::VectorXd r_new = -grad;
            lambda_bar = 0.0;
            success = true;
            accepted = true;
            if (k % n == 0) {
                p = r_new;  // periodic restart
            } else {
                const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
                p = r_new + beta * p;
            }
            r = r_new;
            if (comparison >= 0.75) lambda *= 0.25;
        } else {
            lambda_bar = lambda;
            success = false;
        }
        if (comparison < 0.25) {
            lambda += delta * (1.0 - comparison) / p_norm2;
        }
        if (!std::isfinite(lambda) || lambda > 1e150) break;

        if (callback) {
            const ScgIterate it{k, loss, r.norm(), accepted};
            if (!callback(it, w)) break;
        }
    }

    result.w = std::move(w);
    result.loss = loss;
    result.iterations = k;
    return result;
}

}  // namespace invctl
