#include "riskpanel/linear.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskpanel/errors.hpp"

namespace riskpanel {

namespace {

Eigen::VectorXd intercepts_from_slopes(const DesignMatrix& d, const Eigen::VectorXd& slopes) {
    Eigen::MatrixXd x_mean;
    Eigen::VectorXd y_mean;
    d.group_means(x_mean, y_mean);
    return y_mean - x_mean * slopes;
}

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

}  // namespace

LinearModel fit_ols_fe(const DesignMatrix& d) {
    if (d.rows() == 0) throw ValidationError("fit_ols_fe: empty design");
    Eigen::MatrixXd xd;
    Eigen::VectorXd yd;
    d.within_demean(xd, yd);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xd);
    qr.setThreshold(1e-10);
    if (qr.rank() < d.cols()) {
        std::ostringstream msg;
        msg << "fit_ols_fe: rank-deficient design after demeaning; dependent columns:";
        const auto perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < d.cols(); ++i)
            msg << ' ' << d.feature_names[static_cast<std::size_t>(perm(i))];
        throw NumericError(msg.str());
    }
    LinearModel m;
    m.slopes = qr.solve(yd);
    m.intercepts = intercepts_from_slopes(d, m.slopes);
    return m;
}

LinearModel fit_elastic_net(const DesignMatrix& d, double lambda, double rho) {
    if (lambda < 0.0) throw ValidationError("fit_elastic_net: lambda must be >= 0");
    if (rho < 0.0 || rho > 1.0) throw ValidationError("fit_elastic_net: rho must be in [0,1]");
    if (d.rows() == 0) throw ValidationError("fit_elastic_net: empty design");

    Eigen::MatrixXd xd;
    Eigen::VectorXd yd;
    d.within_demean(xd, yd);
    const Eigen::Index m_cols = d.cols();

    Eigen::VectorXd col_sq(m_cols);
    for (Eigen::Index j = 0; j < m_cols; ++j) col_sq(j) = xd.col(j).squaredNorm();

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(m_cols);
    Eigen::VectorXd residual = yd;  // yd - xd * theta
    const double l1 = lambda * rho;
    const double l2 = lambda * (1.0 - rho);

    const int max_sweeps = 10000;
    double max_change = 0.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        max_change = 0.0;
        for (Eigen::Index j = 0; j < m_cols; ++j) {
            const double old = theta(j);
            // z = x_j' (residual with theta_j's own contribution restored)
            const double z = xd.col(j).dot(residual) + col_sq(j) * old;
            const double denom = col_sq(j) + l2;
            double updated = 0.0;
            if (denom > 0.0) updated = soft_threshold(z, l1 / 2.0) / denom;
            if (updated != old) {
                residual += xd.col(j) * (old - updated);
                theta(j) = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        if (max_change < 1e-8) {
            LinearModel model;
            model.slopes = theta;
            model.intercepts = intercepts_from_slopes(d, theta);
            return model;
        }
    }
    std::vector<double> last(theta.data(), theta.data() + theta.size());
    throw ConvergenceError("fit_elastic_net: no convergence after 10000 sweeps (last max change " +
                               std::to_string(max_change) + ")",
                           std::move(last), max_change);
}

LinearModel fit_lasso(const DesignMatrix& d, double lambda) {
    return fit_elastic_net(d, lambda, 1.0);
}

LinearModel fit_ridge(const DesignMatrix& d, double lambda) {
    return fit_elastic_net(d, lambda, 0.0);
}

namespace {

// Pinball loss with the kink replaced by a quadratic on [-h, h].
struct SmoothPinball {
    double tau;
    double h;

    double value(double u) const {
        if (u >= h) return tau * (u - h / 2.0);
        if (u <= -h) return (1.0 - tau) * (-u - h / 2.0);
        return u * u / (4.0 * h) + (tau - 0.5) * u + h / 4.0;
    }
    double slope(double u) const {
        if (u >= h) return tau;
        if (u <= -h) return tau - 1.0;
        return u / (2.0 * h) + (tau - 0.5);
    }
};

struct QuantileObjective {
    const Eigen::MatrixXd& x;
    const Eigen::VectorXd& y;
    const std::vector<int>& country;
    SmoothPinball loss;
    double lambda;
    Eigen::Index n_countries;

    // beta = [intercepts (C), slopes (M)]
    double smooth_value(const Eigen::VectorXd& beta, Eigen::VectorXd* grad) const {
        const Eigen::Index c = n_countries, m = x.cols();
        if (grad) grad->setZero();
        double total = 0.0;
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const int g = country[static_cast<std::size_t>(r)];
            const double fitted = beta(g) + x.row(r).dot(beta.segment(c, m));
            const double u = y(r) - fitted;
            total += loss.value(u);
            if (grad) {
                const double s = -loss.slope(u);
                (*grad)(g) += s;
                grad->segment(c, m) += s * x.row(r).transpose();
            }
        }
        return total;
    }

    double penalty(const Eigen::VectorXd& beta) const {
        return lambda * beta.tail(x.cols()).lpNorm<1>();
    }
};

}  // namespace

LinearModel fit_quantile(const DesignMatrix& d, double tau, double lambda) {
    if (tau <= 0.0 || tau >= 1.0) throw ValidationError("fit_quantile: tau must be in (0,1)");
    if (lambda < 0.0) throw ValidationError("fit_quantile: lambda must be >= 0");
    if (d.rows() == 0) throw ValidationError("fit_quantile: empty design");

    const Eigen::Index c = static_cast<Eigen::Index>(d.country_codes.size());
    const Eigen::Index m = d.cols();
    QuantileObjective obj{d.x, d.y, d.country, SmoothPinball{tau, 1e-6}, lambda, c};

    // Start each intercept at the country's empirical tau-quantile
    // (upper order statistic convention: the ceil(tau*n)-th value).
    std::vector<std::vector<double>> by_country(static_cast<std::size_t>(c));
    for (Eigen::Index r = 0; r < d.rows(); ++r)
        by_country[static_cast<std::size_t>(d.country[static_cast<std::size_t>(r)])].push_back(d.y(r));
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(c + m);
    for (Eigen::Index g = 0; g < c; ++g) {
        auto& ys = by_country[static_cast<std::size_t>(g)];
        if (ys.empty()) continue;
        std::sort(ys.begin(), ys.end());
        const auto k = static_cast<std::size_t>(
            std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(tau * static_cast<double>(ys.size()))) - 1));
        beta(g) = ys[std::min(k, ys.size() - 1)];
    }

    auto prox = [&](Eigen::VectorXd v, double step) {
        for (Eigen::Index j = c; j < c + m; ++j) v(j) = soft_threshold(v(j), step * lambda);
        return v;
    };
    auto full_objective = [&](const Eigen::VectorXd& b) { return obj.smooth_value(b, nullptr) + obj.penalty(b); };

    // FISTA with backtracking.
    double step = 1.0;
    Eigen::VectorXd zeta = beta;  // extrapolation point
    double momentum = 1.0;
    Eigen::VectorXd grad(c + m);
    double best = full_objective(beta);
    double best_at_check = best;
    const int check_every = 50;
    const int max_iters = 50000;
    for (int iter = 1; iter <= max_iters; ++iter) {
        const double fz = obj.smooth_value(zeta, &grad);
        Eigen::VectorXd candidate;
        for (;;) {
            candidate = prox(zeta - step * grad, step);
            const Eigen::VectorXd diff = candidate - zeta;
            const double quad = fz + grad.dot(diff) + diff.squaredNorm() / (2.0 * step);
            if (obj.smooth_value(candidate, nullptr) <= quad + 1e-14 || step < 1e-16) break;
            step *= 0.5;
        }
        const double momentum_next = (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
        zeta = candidate + ((momentum - 1.0) / momentum_next) * (candidate - beta);
        momentum = momentum_next;
        beta = candidate;

        const double f = full_objective(beta);
        if (f < best) best = f;
        if (iter % check_every == 0) {
            if (best_at_check - best < 1e-9) {
                LinearModel model;
                model.intercepts = beta.head(c);
                model.slopes = beta.segment(c, m);
                return model;
            }
            best_at_check = best;
            step = std::min(step * 4.0, 1.0);  // allow the step to grow again
        }
    }
    std::vector<double> last(beta.data(), beta.data() + beta.size());
    throw ConvergenceError("fit_quantile: still improving after max iterations",
                           std::move(last), best_at_check - best);
}

}  // namespace riskpanel
