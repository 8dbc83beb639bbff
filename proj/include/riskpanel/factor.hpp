#pragma once

#include <Eigen/Dense>

#include "riskpanel/design.hpp"
#include "riskpanel/linear.hpp"

namespace riskpanel {

// Dimension-reduction regressions: features are centered, projected onto K
// latent directions, and the scores enter a fixed-effects regression.
struct FactorModel {
    Eigen::VectorXd col_mean;    // feature centering, size M
    Eigen::MatrixXd projection;  // M x K, scores = (x - mean) * projection
    Eigen::VectorXd coef;        // K
    Eigen::VectorXd intercepts;  // C

    double predict_one(const Eigen::RowVectorXd& x, int country) const {
        return intercepts(country) + ((x.transpose() - col_mean).transpose() * projection).dot(coef);
    }
};

// PCA scores (top-K right singular vectors), then OLS with fixed effects.
FactorModel fit_pcr(const DesignMatrix& d, int n_components);

// Variance-normalized PCA scores as factor estimates, then ridge with fixed
// effects on the scores.
FactorModel fit_factor_ridge(const DesignMatrix& d, int n_factors, double lambda);

}  // namespace riskpanel
