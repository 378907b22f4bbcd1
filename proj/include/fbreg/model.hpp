#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "fbreg/beta_math.hpp"

namespace fbreg {

/// Bounded responses y in (0,1) and an n x k design matrix whose first column is
/// the intercept. Construction validates both and caches log(y), log(1 - y).
class Dataset {
public:
    Dataset(Eigen::VectorXd y, Eigen::MatrixXd X);

    /// Convenience for the single-covariate case: X = [1, z].
    static Dataset from_covariate(const Eigen::VectorXd& y, const Eigen::VectorXd& z);

    const Eigen::VectorXd& y() const { return y_; }
    const Eigen::MatrixXd& X() const { return X_; }
    const Eigen::VectorXd& log_y() const { return log_y_; }
    const Eigen::VectorXd& log1m_y() const { return log1m_y_; }
    std::size_t n() const { return static_cast<std::size_t>(y_.size()); }
    std::size_t k() const { return static_cast<std::size_t>(X_.cols()); }

    /// The covariate z in column 1 (single-covariate designs).
    Eigen::VectorXd z() const;

private:
    Eigen::VectorXd y_;
    Eigen::MatrixXd X_;
    Eigen::VectorXd log_y_;
    Eigen::VectorXd log1m_y_;
};

struct FBRParams {
    Eigen::VectorXd beta;
    double phi = 3.0;
    double omega = 0.5;
    double p = 0.5;

    /// Throws DomainError if phi <= 0 or omega, p fall outside (0,1).
    void validate() const;
};

/// Latent component labels: v[i] == 1 assigns observation i to the lambda1
/// component.
struct Allocation {
    std::vector<unsigned char> v;
    std::size_t n1 = 0;
    std::size_t n0 = 0;

    static Allocation from_labels(std::vector<unsigned char> labels);
    static Allocation all_ones(std::size_t n);
};

/// Prior: beta ~ N(0, diag(sigma_beta_diag)), phi ~ Gamma(shape = kappa * g,
/// rate = g) so that E[phi] = kappa, omega ~ U(0,1), p ~ U(0,1).
struct PriorConfig {
    Eigen::VectorXd sigma_beta_diag;
    double kappa = 30.0;
    double g = 0.1;

    static PriorConfig defaults(std::size_t k);
    void validate(std::size_t k) const;
};

Eigen::VectorXd mu_of(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X);

Eigen::VectorXd omega_tilde_of(double omega, const Eigen::VectorXd& mu, double p);

/// Observed-data log-likelihood; -inf when any reconstructed component pair is
/// invalid.
double loglik(const FBRParams& params, const Dataset& data);

/// Complete-data log-likelihood with omega_tilde taken from omega_tilde_of.
double loglik_complete(const FBRParams& params, const Allocation& alloc, const Dataset& data);

/// Complete-data log-likelihood with explicit per-observation means and
/// component distances. This is the form the sampler uses: omega_tilde is a
/// state variable there, not a function of beta.
double loglik_complete(const Eigen::VectorXd& mu, const Eigen::VectorXd& omega_tilde, double phi,
                       double p, const Allocation& alloc, const Dataset& data);

double log_prior_beta(const Eigen::VectorXd& beta, const PriorConfig& prior);
double log_prior_phi(double phi, const PriorConfig& prior);
double log_prior(const FBRParams& params, const PriorConfig& prior);

}  // namespace fbreg
