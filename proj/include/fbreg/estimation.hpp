#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "fbreg/diagnostics.hpp"
#include "fbreg/model.hpp"

namespace fbreg {

/// Posterior-median point estimate and the curves it implies on the training
/// design. lambda2_hat is the curve conventionally plotted as the fitted
/// regression function; mu_hat is the prediction.
struct FBREstimate {
    Eigen::VectorXd beta_hat;
    double p_hat = 0.0;
    double phi_hat = 0.0;
    double omega_hat = 0.0;
    Eigen::VectorXd mu_hat;
    Eigen::VectorXd omega_tilde_opt;
    Eigen::VectorXd lambda1_hat;
    Eigen::VectorXd lambda2_hat;
};

struct CurvePoint {
    double mu;
    double lambda1;
    double lambda2;
};

FBREstimate point_estimate(const ThinnedSample& pooled, const Dataset& data);

/// mu, lambda1, lambda2 at one covariate row. Every value is kept inside
/// [kProbEps, 1 - kProbEps].
CurvePoint curves_at(const Eigen::VectorXd& beta_hat, double p_hat, double omega_hat,
                     const Eigen::VectorXd& x);

/// Fitted mean inv_logit(x' beta_hat).
double predict(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& x_new);

/// Evenly spaced z grid (inclusive) for single-covariate models.
std::vector<double> z_grid(double z_min, double z_max, std::size_t points = 200);

struct OlsFit {
    double beta0 = 0.0;
    double beta1 = 0.0;
    Eigen::VectorXd fitted;
    std::size_t n_out_of_range = 0;
};

/// Least squares of y on z (column 1 of the design). Throws
/// std::invalid_argument for a constant covariate.
OlsFit ols_fit(const Dataset& data);

/// Number of entries not strictly inside (0,1).
std::size_t count_out_of_range(const Eigen::VectorXd& values);

}  // namespace fbreg
