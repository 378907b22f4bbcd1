#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fbreg/model.hpp"
#include "fbreg/rng.hpp"

namespace fbreg {

/// How the component distance is refreshed each sweep. `Vector` scales every
/// observation's own cap by one shared uniform; `ScalarMin` scales the smallest
/// cap over all observations and applies it to everyone.
enum class OmegaStyle { Vector, ScalarMin };

OmegaStyle parse_omega_style(const std::string& s);
std::string to_string(OmegaStyle style);

struct SamplerConfig {
    std::size_t n_samples = 8000;
    std::size_t n_chains = 20;
    std::size_t burn_in = 4000;
    double sigma_phi = 0.125;          ///< random-walk standard deviation for phi
    Eigen::VectorXd sigma_j_diag;      ///< proposal variances for beta
    FBRParams init;
    std::uint64_t seed = 1;
    OmegaStyle omega_style = OmegaStyle::Vector;
    std::size_t n_threads = 1;         ///< does not affect results

    /// Defaults for a k-column design; init.beta is zero until the caller sets it.
    static SamplerConfig defaults(std::size_t k);
    void validate(std::size_t k) const;
};

/// Full state of one chain between sweeps. `mu` always corresponds to
/// `params.beta`; `omega_tilde` is carried separately because it is held fixed
/// while beta moves.
struct ChainState {
    FBRParams params;
    Eigen::VectorXd mu;
    Eigen::VectorXd omega_tilde;
    Allocation alloc;

    /// Builds mu and omega_tilde from `init`. Throws std::runtime_error when the
    /// initial likelihood is not finite.
    static ChainState initial(const FBRParams& init, const Dataset& data);
};

struct ChainDraws {
    std::size_t chain_id = 0;
    std::size_t offset = 0;  ///< index of row 0 in the original chain (advanced by burn)
    Eigen::MatrixXd beta;    ///< one row per draw
    Eigen::VectorXd phi;
    Eigen::VectorXd omega;
    Eigen::VectorXd p;
    std::vector<unsigned char> accepted_phi;
    std::vector<unsigned char> accepted_beta;
    Allocation final_alloc;

    std::size_t size() const { return static_cast<std::size_t>(phi.size()); }
    std::size_t k() const { return static_cast<std::size_t>(beta.cols()); }
    std::size_t accept_phi() const;
    std::size_t accept_beta() const;
};

/// Raised by run_chains when a chain fails; carries the chain id.
class ChainError : public std::runtime_error {
public:
    ChainError(std::size_t chain_id, const std::string& what);
    std::size_t chain_id() const { return chain_id_; }

private:
    std::size_t chain_id_;
};

/// Draws every label from its conditional Bernoulli given explicit component means.
Allocation draw_v(const Dataset& data, const Eigen::VectorXd& lambda1,
                  const Eigen::VectorXd& lambda2, double phi, double p, Rng& rng);

/// Same conditional, component means reconstructed from the chain state.
Allocation draw_v(const ChainState& state, const Dataset& data, Rng& rng);

/// Probability that label i equals 1 given its component densities.
double allocation_probability(double y, double lambda1, double lambda2, double phi, double p);

/// p | v ~ Beta(n1 + 1, n0 + 1).
double draw_p(const Allocation& alloc, Rng& rng);

struct OmegaDraw {
    double omega;
    Eigen::VectorXd omega_tilde;
};

OmegaDraw draw_omega(const Eigen::VectorXd& mu, double p, Rng& rng,
                     OmegaStyle style = OmegaStyle::Vector);

struct PhiStep {
    double phi;
    bool accepted;
    double loglik;  ///< complete-data log-likelihood at the returned phi
};

/// Random-walk Metropolis update of phi with everything else held fixed.
/// Pass `current_loglik` when already known; NaN recomputes it.
PhiStep mh_phi(const ChainState& state, const Dataset& data, const PriorConfig& prior,
               double sigma_phi, Rng& rng, double current_loglik = std::numeric_limits<double>::quiet_NaN());

struct BetaStep {
    Eigen::VectorXd beta;
    Eigen::VectorXd mu;
    bool accepted;
    double loglik;
};

/// Gaussian random-walk Metropolis update of beta with proposal covariance
/// diag(sigma_j_diag). omega_tilde stays fixed; proposals that push a component
/// mean out of (0,1) are rejected.
BetaStep mh_beta(const ChainState& state, const Dataset& data, const PriorConfig& prior,
                 const Eigen::VectorXd& sigma_j_diag, Rng& rng,
                 double current_loglik = std::numeric_limits<double>::quiet_NaN());

/// One full sweep: v, p, mu, omega, phi, beta. Returns the acceptance flags.
std::pair<bool, bool> sweep(ChainState& state, const Dataset& data, const PriorConfig& prior,
                            const SamplerConfig& config, Rng& rng);

ChainDraws run_chain(const Dataset& data, const PriorConfig& prior, const SamplerConfig& config,
                     std::size_t chain_id);

/// Runs config.n_chains chains on up to config.n_threads threads. Output is
/// ordered by chain id and independent of the thread count.
std::vector<ChainDraws> run_chains(const Dataset& data, const PriorConfig& prior,
                                   const SamplerConfig& config);

}  // namespace fbreg
