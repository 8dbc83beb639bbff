#include "riskpanel/factor.hpp"

#include <cmath>

#include "riskpanel/errors.hpp"

namespace riskpanel {

namespace {

struct Decomposition {
    Eigen::VectorXd col_mean;
    Eigen::MatrixXd v;       // right singular vectors
    Eigen::VectorXd sigma;   // singular values
    Eigen::Index rank;
};

Decomposition pca(const DesignMatrix& d) {
    Decomposition out;
    out.col_mean = d.x.colwise().mean();
    Eigen::MatrixXd centered = d.x.rowwise() - out.col_mean.transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    out.v = svd.matrixV();
    out.sigma = svd.singularValues();
    const double tol = 1e-10 * (out.sigma.size() ? out.sigma(0) : 0.0);
    out.rank = 0;
    for (Eigen::Index i = 0; i < out.sigma.size(); ++i)
        if (out.sigma(i) > tol) ++out.rank;
    return out;
}

DesignMatrix scores_design(const DesignMatrix& d, const Eigen::MatrixXd& projection,
                           const Eigen::VectorXd& col_mean) {
    DesignMatrix s;
    s.x = (d.x.rowwise() - col_mean.transpose()) * projection;
    s.y = d.y;
    s.country = d.country;
    s.feature_date = d.feature_date;
    s.country_codes = d.country_codes;
    for (Eigen::Index k = 0; k < projection.cols(); ++k)
        s.feature_names.push_back("score_" + std::to_string(k + 1));
    return s;
}

}  // namespace

FactorModel fit_pcr(const DesignMatrix& d, int n_components) {
    if (n_components < 1) throw ValidationError("fit_pcr: n_components must be >= 1");
    if (d.rows() == 0) throw ValidationError("fit_pcr: empty design");
    const Decomposition dec = pca(d);
    if (n_components > dec.rank)
        throw NumericError("fit_pcr: n_components " + std::to_string(n_components) +
                           " exceeds feature rank " + std::to_string(dec.rank));
    FactorModel m;
    m.col_mean = dec.col_mean;
    m.projection = dec.v.leftCols(n_components);
    const DesignMatrix s = scores_design(d, m.projection, m.col_mean);
    const LinearModel fit = fit_ols_fe(s);
    m.coef = fit.slopes;
    m.intercepts = fit.intercepts;
    return m;
}

FactorModel fit_factor_ridge(const DesignMatrix& d, int n_factors, double lambda) {
    if (n_factors < 1) throw ValidationError("fit_factor_ridge: n_factors must be >= 1");
    if (d.rows() == 0) throw ValidationError("fit_factor_ridge: empty design");
    const Decomposition dec = pca(d);
    if (n_factors > dec.rank)
        throw NumericError("fit_factor_ridge: n_factors " + std::to_string(n_factors) +
                           " exceeds feature rank " + std::to_string(dec.rank));
    FactorModel m;
    m.col_mean = dec.col_mean;
    // Scale each direction so the factor scores have unit sample variance.
    const double n = static_cast<double>(d.rows());
    m.projection = dec.v.leftCols(n_factors);
    for (Eigen::Index k = 0; k < n_factors; ++k)
        m.projection.col(k) *= std::sqrt(std::max(n - 1.0, 1.0)) / dec.sigma(k);
    const DesignMatrix s = scores_design(d, m.projection, m.col_mean);
    const LinearModel fit = fit_ridge(s, lambda);
    m.coef = fit.slopes;
    m.intercepts = fit.intercepts;
    return m;
}

}  // namespace riskpanel
