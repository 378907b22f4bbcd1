#include "fbreg/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fbreg {

namespace {

double squeeze_open(double x) { return std::clamp(x, kProbEps, 1.0 - kProbEps); }

double column_median(const Eigen::VectorXd& col) {
    return median(std::vector<double>(col.data(), col.data() + col.size()));
}

}  // namespace

FBREstimate point_estimate(const ThinnedSample& pooled, const Dataset& data) {
    if (pooled.size() == 0) throw std::invalid_argument("point estimate needs a nonempty sample");
    const Eigen::MatrixXd betas = pooled.beta();
    if (static_cast<std::size_t>(betas.cols()) != data.k())
        throw std::invalid_argument("sample and dataset disagree on k");

    FBREstimate est;
    est.beta_hat.resize(betas.cols());
    for (Eigen::Index r = 0; r < betas.cols(); ++r) est.beta_hat[r] = column_median(betas.col(r));
    est.p_hat = column_median(pooled.column("p"));
    est.phi_hat = column_median(pooled.column("phi"));
    est.omega_hat = column_median(pooled.column("omega"));

    const auto n = static_cast<Eigen::Index>(data.n());
    est.mu_hat = mu_of(est.beta_hat, data.X());
    est.omega_tilde_opt.resize(n);
    est.lambda1_hat.resize(n);
    est.lambda2_hat.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = est.mu_hat[i];
        const double wt = est.omega_hat * omega_tilde_cap(mu, est.p_hat);
        est.omega_tilde_opt[i] = wt;
        est.lambda1_hat[i] = squeeze_open(mu + (1.0 - est.p_hat) * wt);
        est.lambda2_hat[i] = squeeze_open(mu - est.p_hat * wt);
    }
    return est;
}

CurvePoint curves_at(const Eigen::VectorXd& beta_hat, double p_hat, double omega_hat,
                     const Eigen::VectorXd& x) {
    const double mu = predict(beta_hat, x);
    const double wt = omega_hat * omega_tilde_cap(mu, p_hat);
    return {mu, squeeze_open(mu + (1.0 - p_hat) * wt), squeeze_open(mu - p_hat * wt)};
}

double predict(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& x_new) {
    if (beta_hat.size() != x_new.size())
        throw std::invalid_argument("covariate row length does not match beta");
    return inv_logit(x_new.dot(beta_hat));
}

std::vector<double> z_grid(double z_min, double z_max, std::size_t points) {
    if (points < 2) return {z_min};
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = z_min + (z_max - z_min) * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

OlsFit ols_fit(const Dataset& data) {
    if (data.k() != 2) throw std::invalid_argument("ols baseline expects a single covariate");
    if (data.n() < 2) throw std::invalid_argument("ols baseline needs at least two observations");
    const Eigen::VectorXd z = data.z();
    const Eigen::VectorXd& y = data.y();
    const double zbar = z.mean();
    const double ybar = y.mean();
    const double sxx = (z.array() - zbar).square().sum();
    if (!(sxx > 0.0)) throw std::invalid_argument("ols baseline: covariate is constant");
    const double sxy = ((z.array() - zbar) * (y.array() - ybar)).sum();

    OlsFit fit;
    fit.beta1 = sxy / sxx;
    fit.beta0 = ybar - fit.beta1 * zbar;
    fit.fitted = (fit.beta0 + fit.beta1 * z.array()).matrix();
    fit.n_out_of_range = count_out_of_range(fit.fitted);
    return fit;
}

std::size_t count_out_of_range(const Eigen::VectorXd& values) {
    return static_cast<std::size_t>((values.array() <= 0.0 || values.array() >= 1.0).count());
}

}  // namespace fbreg
