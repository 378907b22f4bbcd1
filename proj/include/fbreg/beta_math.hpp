#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "fbreg/rng.hpp"

namespace fbreg {

/// Thrown when an argument lies outside the support of a density or transform.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Thrown when a (mu, omega_tilde, p) triple does not reconstruct a valid pair of
/// component means. The sampler treats this as a zero-likelihood state.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

/// Lower clamp applied by inv_logit; the upper clamp is 1 - kProbEps.
inline constexpr double kProbEps = 1e-15;

/// Beta distribution in mean-precision form: shapes are (mean * precision,
/// (1 - mean) * precision).
class MeanPrecisionBeta {
public:
    MeanPrecisionBeta(double mean, double precision);

    double mean() const { return mean_; }
    double precision() const { return precision_; }
    double shape1() const { return mean_ * precision_; }
    double shape2() const { return (1.0 - mean_) * precision_; }

private:
    double mean_;
    double precision_;
};

/// Two-component mixture p * B(lambda1, phi) + (1 - p) * B(lambda2, phi) with
/// 0 < lambda2 < lambda1 < 1.
class FlexibleBeta {
public:
    FlexibleBeta(double lambda1, double lambda2, double phi, double p);

    double lambda1() const { return lambda1_; }
    double lambda2() const { return lambda2_; }
    double phi() const { return phi_; }
    double p() const { return p_; }

private:
    double lambda1_;
    double lambda2_;
    double phi_;
    double p_;
};

/// Mean parametrization (mu, phi, omega, p) of the flexible Beta. The component
/// distance is omega_tilde = omega * omega_tilde_cap(mu, p).
struct FBMeanParam {
    double mu;
    double phi;
    double omega;
    double p;

    double omega_tilde() const;
    FlexibleBeta to_flexible_beta() const;
};

double logit(double x);

/// Numerically stable logistic function, clamped to [kProbEps, 1 - kProbEps].
double inv_logit(double t);

/// log f(x; a, b) for the mean-precision Beta, evaluated through lgamma.
double log_beta_mp(double x, const MeanPrecisionBeta& dist);

/// Same density with the caller supplying log(x) and log1p(-x). No validation;
/// this is the hot path used by the likelihood code.
double log_beta_mp_unchecked(double log_x, double log1m_x, double mean, double precision,
                             double lgamma_precision);

double log_fb_density(double y, const FlexibleBeta& fb);

/// Same density with the complement supplied by the caller, for arguments
/// closer to 1 than a double can resolve (y = 1 - t for tiny t).
double log_fb_density(double y, double one_minus_y, const FlexibleBeta& fb);

double fb_mean(const FlexibleBeta& fb);

/// Component means lambda1 = mu + (1 - p) w, lambda2 = mu - p w.
/// Throws RangeError unless 0 < lambda2 < lambda1 < 1.
std::pair<double, double> lambdas_from(double mu, double omega_tilde, double p);

/// min{mu / p, (1 - mu) / (1 - p)}: the largest component distance that keeps
/// both component means inside [0, 1].
double omega_tilde_cap(double mu, double p);

/// log(exp(a) + exp(b)) without overflow.
double log_sum_exp(double a, double b);

/// Draw from Gamma(shape, 1) returned on the log scale, accurate for shapes well
/// below 1 where the draw itself underflows.
double sample_log_gamma(double shape, Rng& rng);

/// Beta draw via the ratio of two independent Gamma variates.
double sample_beta(double shape1, double shape2, Rng& rng);

double sample_beta_mp(const MeanPrecisionBeta& dist, Rng& rng);

struct FBDraw {
    double y;
    int component;  ///< 1 for the lambda1 component, 0 for lambda2
};

FBDraw sample_fb(const FlexibleBeta& fb, Rng& rng);

}  // namespace fbreg
