#include "fbreg/beta_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fbreg {

namespace {

bool open_unit(double x) { return x > 0.0 && x < 1.0; }

std::string describe(const char* what, double value) {
    std::ostringstream os;
    os.precision(17);
    os << what << " = " << value;
    return os.str();
}

}  // namespace

MeanPrecisionBeta::MeanPrecisionBeta(double mean, double precision)
    : mean_(mean), precision_(precision) {
    if (!open_unit(mean)) throw DomainError(describe("beta mean outside (0,1)", mean));
    if (!(precision > 0.0) || !std::isfinite(precision))
        throw DomainError(describe("beta precision must be positive", precision));
}

FlexibleBeta::FlexibleBeta(double lambda1, double lambda2, double phi, double p)
    : lambda1_(lambda1), lambda2_(lambda2), phi_(phi), p_(p) {
    if (!open_unit(lambda1) || !open_unit(lambda2))
        throw DomainError("flexible beta component means must lie in (0,1)");
    if (!(lambda2 < lambda1))
        throw DomainError("flexible beta requires lambda2 < lambda1");
    if (!(phi > 0.0) || !std::isfinite(phi)) throw DomainError(describe("phi must be positive", phi));
    if (!open_unit(p)) throw DomainError(describe("mixture weight outside (0,1)", p));
}

double FBMeanParam::omega_tilde() const { return omega * omega_tilde_cap(mu, p); }

FlexibleBeta FBMeanParam::to_flexible_beta() const {
    if (!open_unit(omega)) throw DomainError(describe("omega outside (0,1)", omega));
    auto [l1, l2] = lambdas_from(mu, omega_tilde(), p);
    return FlexibleBeta(l1, l2, phi, p);
}

double logit(double x) {
    if (!open_unit(x)) throw DomainError(describe("logit argument outside (0,1)", x));
    return std::log(x) - std::log1p(-x);
}

double inv_logit(double t) {
    double r;
    if (t >= 0.0) {
        r = 1.0 / (1.0 + std::exp(-t));
    } else {
        const double e = std::exp(t);
        r = e / (1.0 + e);
    }
    return std::clamp(r, kProbEps, 1.0 - kProbEps);
}

double log_beta_mp_unchecked(double log_x, double log1m_x, double mean, double precision,
                             double lgamma_precision) {
    const double s1 = mean * precision;
    const double s2 = (1.0 - mean) * precision;
    return lgamma_precision - std::lgamma(s1) - std::lgamma(s2) + (s1 - 1.0) * log_x +
           (s2 - 1.0) * log1m_x;
}

double log_beta_mp(double x, const MeanPrecisionBeta& dist) {
    if (!open_unit(x)) throw DomainError(describe("beta density argument outside (0,1)", x));
    return log_beta_mp_unchecked(std::log(x), std::log1p(-x), dist.mean(), dist.precision(),
                                 std::lgamma(dist.precision()));
}

double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

double log_fb_density(double y, const FlexibleBeta& fb) {
    if (!open_unit(y)) throw DomainError(describe("flexible beta argument outside (0,1)", y));
    return log_fb_density(y, 1.0 - y, fb);
}

double log_fb_density(double y, double one_minus_y, const FlexibleBeta& fb) {
    if (!(y > 0.0) || !(one_minus_y > 0.0) || !(y <= 1.0) || !(one_minus_y <= 1.0))
        throw DomainError(describe("flexible beta argument outside (0,1)", y));
    // Take each log from whichever of y, 1 - y is the smaller (and so exact).
    const double ly = y <= 0.5 ? std::log(y) : std::log1p(-one_minus_y);
    const double l1y = y <= 0.5 ? std::log1p(-y) : std::log(one_minus_y);
    const double lg = std::lgamma(fb.phi());
    const double c1 = std::log(fb.p()) + log_beta_mp_unchecked(ly, l1y, fb.lambda1(), fb.phi(), lg);
    const double c2 =
        std::log1p(-fb.p()) + log_beta_mp_unchecked(ly, l1y, fb.lambda2(), fb.phi(), lg);
    return log_sum_exp(c1, c2);
}

double fb_mean(const FlexibleBeta& fb) {
    return fb.p() * fb.lambda1() + (1.0 - fb.p()) * fb.lambda2();
}

std::pair<double, double> lambdas_from(double mu, double omega_tilde, double p) {
    const double l1 = mu + (1.0 - p) * omega_tilde;
    const double l2 = mu - p * omega_tilde;
    if (!(l2 > 0.0 && l1 < 1.0 && l2 < l1)) {
        std::ostringstream os;
        os.precision(17);
        os << "invalid component means: mu=" << mu << " omega_tilde=" << omega_tilde
           << " p=" << p << " -> (" << l1 << ", " << l2 << ")";
        throw RangeError(os.str());
    }
    return {l1, l2};
}

double omega_tilde_cap(double mu, double p) { return std::min(mu / p, (1.0 - mu) / (1.0 - p)); }

double sample_log_gamma(double shape, Rng& rng) {
    if (shape >= 1.0) {
        std::gamma_distribution<double> gamma(shape, 1.0);
        return std::log(gamma(rng));
    }
    // G(a) = G(a + 1) * U^(1/a)
    std::gamma_distribution<double> gamma(shape + 1.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = 1.0 - unif(rng);  // (0, 1]
    return std::log(gamma(rng)) + std::log(u) / shape;
}

double sample_beta(double shape1, double shape2, Rng& rng) {
    const double g1 = sample_log_gamma(shape1, rng);
    const double g2 = sample_log_gamma(shape2, rng);
    // x = G1 / (G1 + G2) = logistic(g1 - g2)
    const double d = g1 - g2;
    double x;
    if (d >= 0.0) {
        x = 1.0 / (1.0 + std::exp(-d));
    } else {
        const double e = std::exp(d);
        x = e / (1.0 + e);
    }
    return std::clamp(x, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double sample_beta_mp(const MeanPrecisionBeta& dist, Rng& rng) {
    return sample_beta(dist.shape1(), dist.shape2(), rng);
}

FBDraw sample_fb(const FlexibleBeta& fb, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int component = unif(rng) < fb.p() ? 1 : 0;
    const double mean = component == 1 ? fb.lambda1() : fb.lambda2();
    return {sample_beta(mean * fb.phi(), (1.0 - mean) * fb.phi(), rng), component};
}

}  // namespace fbreg
