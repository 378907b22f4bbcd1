#include "fbreg/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/QR>

namespace fbreg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool valid_pair(double l1, double l2) { return l2 > 0.0 && l1 < 1.0 && l2 < l1; }

}  // namespace

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd X) : y_(std::move(y)), X_(std::move(X)) {
    if (y_.size() == 0) throw std::invalid_argument("dataset is empty");
    if (X_.rows() != y_.size())
        throw std::invalid_argument("design matrix row count does not match response length");
    if (X_.cols() == 0) throw std::invalid_argument("design matrix has no columns");
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
        if (!(y_[i] > 0.0 && y_[i] < 1.0)) {
            std::ostringstream os;
            os.precision(17);
            os << "response " << i << " = " << y_[i] << " is outside (0,1)";
            throw DomainError(os.str());
        }
    }
    if (!X_.allFinite()) throw std::invalid_argument("design matrix contains non-finite values");
    if ((X_.col(0).array() != 1.0).any())
        throw std::invalid_argument("first design column must be the all-ones intercept");
    if (X_.cols() > X_.rows())
        throw std::invalid_argument("more covariates than observations");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X_);
    if (qr.rank() < X_.cols()) throw std::invalid_argument("design matrix is rank deficient");

    log_y_ = y_.array().log();
    log1m_y_ = (-y_.array()).log1p();
}

Dataset Dataset::from_covariate(const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
    Eigen::MatrixXd X(z.size(), 2);
    X.col(0).setOnes();
    X.col(1) = z;
    return Dataset(y, std::move(X));
}

Eigen::VectorXd Dataset::z() const {
    if (X_.cols() < 2) throw std::logic_error("dataset has no covariate column");
    return X_.col(1);
}

void FBRParams::validate() const {
    if (!(phi > 0.0) || !std::isfinite(phi)) throw DomainError("phi must be positive");
    if (!(omega > 0.0 && omega < 1.0)) throw DomainError("omega must lie in (0,1)");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("p must lie in (0,1)");
    if (!beta.allFinite()) throw DomainError("beta must be finite");
}

Allocation Allocation::from_labels(std::vector<unsigned char> labels) {
    Allocation a;
    a.v = std::move(labels);
    for (auto& x : a.v) {
        x = x ? 1 : 0;
        a.n1 += x;
    }
    a.n0 = a.v.size() - a.n1;
    return a;
}

Allocation Allocation::all_ones(std::size_t n) {
    return from_labels(std::vector<unsigned char>(n, 1));
}

PriorConfig PriorConfig::defaults(std::size_t k) {
    PriorConfig prior;
    prior.sigma_beta_diag = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k), 1e4);
    return prior;
}

void PriorConfig::validate(std::size_t k) const {
    if (static_cast<std::size_t>(sigma_beta_diag.size()) != k)
        throw std::invalid_argument("prior variance vector length does not match k");
    if ((sigma_beta_diag.array() <= 0.0).any())
        throw std::invalid_argument("prior variances must be positive");
    if (!(kappa > 0.0) || !(g > 0.0)) throw std::invalid_argument("kappa and g must be positive");
}

Eigen::VectorXd mu_of(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X) {
    if (X.cols() != beta.size()) throw std::invalid_argument("beta length does not match X");
    Eigen::VectorXd eta = X * beta;
    return eta.unaryExpr([](double t) { return inv_logit(t); });
}

Eigen::VectorXd omega_tilde_of(double omega, const Eigen::VectorXd& mu, double p) {
    return mu.unaryExpr([&](double m) { return omega * omega_tilde_cap(m, p); });
}

double loglik(const FBRParams& params, const Dataset& data) {
    const Eigen::VectorXd mu = mu_of(params.beta, data.X());
    const double lg = std::lgamma(params.phi);
    const double log_p = std::log(params.p);
    const double log_q = std::log1p(-params.p);
    double total = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double wt = params.omega * omega_tilde_cap(mu[i], params.p);
        const double l1 = mu[i] + (1.0 - params.p) * wt;
        const double l2 = mu[i] - params.p * wt;
        if (!valid_pair(l1, l2)) return kNegInf;
        const double ly = data.log_y()[i];
        const double l1y = data.log1m_y()[i];
        total += log_sum_exp(log_p + log_beta_mp_unchecked(ly, l1y, l1, params.phi, lg),
                             log_q + log_beta_mp_unchecked(ly, l1y, l2, params.phi, lg));
    }
    return total;
}

double loglik_complete(const Eigen::VectorXd& mu, const Eigen::VectorXd& omega_tilde, double phi,
                       double p, const Allocation& alloc, const Dataset& data) {
    const double lg = std::lgamma(phi);
    double total = static_cast<double>(alloc.n1) * std::log(p) +
                   static_cast<double>(alloc.n0) * std::log1p(-p);
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double l1 = mu[i] + (1.0 - p) * omega_tilde[i];
        const double l2 = mu[i] - p * omega_tilde[i];
        if (!valid_pair(l1, l2)) return kNegInf;
        const double mean = alloc.v[i] ? l1 : l2;
        total += log_beta_mp_unchecked(data.log_y()[i], data.log1m_y()[i], mean, phi, lg);
    }
    return total;
}

double loglik_complete(const FBRParams& params, const Allocation& alloc, const Dataset& data) {
    const Eigen::VectorXd mu = mu_of(params.beta, data.X());
    return loglik_complete(mu, omega_tilde_of(params.omega, mu, params.p), params.phi, params.p,
                           alloc, data);
}

double log_prior_beta(const Eigen::VectorXd& beta, const PriorConfig& prior) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < beta.size(); ++r) {
        const double var = prior.sigma_beta_diag[r];
        total += -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * beta[r] * beta[r] / var;
    }
    return total;
}

double log_prior_phi(double phi, const PriorConfig& prior) {
    if (!(phi > 0.0)) return kNegInf;
    const double shape = prior.kappa * prior.g;
    const double rate = prior.g;
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(phi) -
           rate * phi;
}

double log_prior(const FBRParams& params, const PriorConfig& prior) {
    if (!(params.omega > 0.0 && params.omega < 1.0)) return kNegInf;
    if (!(params.p > 0.0 && params.p < 1.0)) return kNegInf;
    return log_prior_beta(params.beta, prior) + log_prior_phi(params.phi, prior);
}

}  // namespace fbreg
