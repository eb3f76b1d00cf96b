#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems with
// numerical Jacobians.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nfcl/errors.hpp"

namespace nfcl {

struct FitOptions {
    int max_iterations = 200;
    double relative_cost_tolerance = 1e-10;
    double step_tolerance = 1e-10;  // relative to the parameter norm
    double initial_damping = 1e-3;
    double max_damping = 1e16;
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> params;
    std::vector<double> covariance_diag; // empty when J^T J is singular
    double residual_norm = 0.0;          // Euclidean norm of the (weighted) residual vector
    bool converged = false;
    int iterations = 0;
    std::vector<double> cost_history;    // squared residual norm after each accepted step

    [[nodiscard]] double param(std::string_view name) const {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) {
                return params[i];
            }
        }
        throw DomainError("fit has no parameter named '" + std::string(name) + "'");
    }

    [[nodiscard]] std::optional<double> standard_error(std::string_view name) const {
        for (std::size_t i = 0; i < names.size() && i < covariance_diag.size(); ++i) {
            if (names[i] == name) {
                return std::sqrt(covariance_diag[i]);
            }
        }
        return std::nullopt;
    }
};

namespace detail {

template <class ResidualFn>
Eigen::MatrixXd numerical_jacobian(ResidualFn& residuals, const Eigen::VectorXd& p,
                                   const Eigen::VectorXd& typical, Eigen::Index m) {
    Eigen::MatrixXd jac(m, p.size());
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        const double step = 1e-6 * std::max(std::abs(p[j]), typical[j]);
        Eigen::VectorXd hi = p;
        Eigen::VectorXd lo = p;
        hi[j] += step;
        lo[j] -= step;
        jac.col(j) = (residuals(hi) - residuals(lo)) / (hi[j] - lo[j]);
    }
    return jac;
}

} // namespace detail

/// Minimizes ||residuals(p)||^2 from p0. `typical` sets the Jacobian step
/// floor per parameter. With `absolute_sigma` the residuals are taken as
/// already divided by their standard deviations and the covariance is
/// (J^T J)^-1; otherwise it is scaled by the reduced chi-square.
///
/// Accepted steps never increase the cost. Non-convergence is reported
/// through FitResult::converged with the best parameters found.
template <class ResidualFn>
FitResult levenberg_marquardt(ResidualFn residuals, Eigen::VectorXd p0,
                              std::vector<std::string> names, Eigen::VectorXd typical,
                              bool absolute_sigma, const FitOptions& opt = {}) {
    FitResult out;
    out.names = std::move(names);
    Eigen::VectorXd p = std::move(p0);
    Eigen::VectorXd r = residuals(p);
    const Eigen::Index m = r.size();
    const Eigen::Index n = p.size();
    if (m < n) {
        throw DomainError("fewer residuals than fit parameters");
    }
    double cost = r.squaredNorm();
    double lambda = opt.initial_damping;

    for (int it = 0; it < opt.max_iterations && !out.converged; ++it) {
        if (cost == 0.0) {
            out.converged = true;
            break;
        }
        const Eigen::MatrixXd jac = detail::numerical_jacobian(residuals, p, typical, m);
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-300);

        bool accepted = false;
        while (lambda <= opt.max_damping) {
            Eigen::MatrixXd lhs = jtj;
            lhs.diagonal() += lambda * diag;
            const Eigen::VectorXd step = lhs.ldlt().solve(-grad);
            const Eigen::VectorXd trial = p + step;
            const Eigen::VectorXd r_trial = residuals(trial);
            const double cost_trial = r_trial.squaredNorm();
            if (std::isfinite(cost_trial) && cost_trial <= cost) {
                const double drop = cost - cost_trial;
                const bool small_step =
                    step.norm() <= opt.step_tolerance * (p.norm() + opt.step_tolerance);
                p = trial;
                r = r_trial;
                cost = cost_trial;
                out.cost_history.push_back(cost);
                ++out.iterations;
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
                if (drop <= opt.relative_cost_tolerance * (cost + drop) || small_step) {
                    out.converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No descent direction left at working precision.
            out.converged = true;
            break;
        }
    }

    out.params.assign(p.data(), p.data() + n);
    out.residual_norm = std::sqrt(cost);

    const Eigen::MatrixXd jac = detail::numerical_jacobian(residuals, p, typical, m);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (lu.isInvertible()) {
        Eigen::MatrixXd cov = lu.inverse();
        if (!absolute_sigma && m > n) {
            cov *= cost / static_cast<double>(m - n);
        }
        const Eigen::VectorXd variances = cov.diagonal();
        out.covariance_diag.assign(variances.data(), variances.data() + n);
    }
    return out;
}

} // namespace nfcl
