#pragma once

#include <Eigen/Dense>

#include "riskpanel/design.hpp"

namespace riskpanel {

// Pooled panel regression with per-country intercepts and common slopes.
struct LinearModel {
    Eigen::VectorXd slopes;      // size M
    Eigen::VectorXd intercepts;  // size C, indexed like DesignMatrix::country

    double predict_one(const Eigen::RowVectorXd& x, int country) const {
        return intercepts(country) + x.dot(slopes);
    }
};

// Within-demeaning then least squares. Throws NumericError naming collinear
// columns on rank deficiency.
LinearModel fit_ols_fe(const DesignMatrix& d);

// Coordinate descent on RSS + lambda * (rho * |theta|_1 + (1 - rho) * |theta|_2^2),
// fixed effects unpenalized. Converges when the largest coefficient change in
// a sweep drops below 1e-8; throws ConvergenceError after 10000 sweeps.
LinearModel fit_elastic_net(const DesignMatrix& d, double lambda, double rho);
LinearModel fit_lasso(const DesignMatrix& d, double lambda);
LinearModel fit_ridge(const DesignMatrix& d, double lambda);

// Penalized median/quantile regression: sum of pinball losses (Huber-smoothed
// at width 1e-6) plus lambda * |theta|_1, solved by accelerated proximal
// gradient descent. Converged when the best objective stops improving by more
// than 1e-9 over 50 iterations.
LinearModel fit_quantile(const DesignMatrix& d, double tau, double lambda);

}  // namespace riskpanel
