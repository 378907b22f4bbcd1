#include "fbreg/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace fbreg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double uniform_open(Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u;
    do {
        u = unif(rng);
    } while (u == 0.0);
    return u;
}

bool metropolis_accept(double log_ratio, Rng& rng) {
    if (std::isnan(log_ratio)) return false;
    if (log_ratio >= 0.0) return true;
    return std::log(uniform_open(rng)) < log_ratio;
}

}  // namespace

OmegaStyle parse_omega_style(const std::string& s) {
    if (s == "vector") return OmegaStyle::Vector;
    if (s == "scalar-min") return OmegaStyle::ScalarMin;
    throw std::invalid_argument("unknown omega style '" + s + "' (expected vector|scalar-min)");
}

std::string to_string(OmegaStyle style) {
    return style == OmegaStyle::Vector ? "vector" : "scalar-min";
}

SamplerConfig SamplerConfig::defaults(std::size_t k) {
    SamplerConfig c;
    c.sigma_j_diag = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k), 1e-3);
    c.init.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    c.init.phi = 3.0;
    c.init.omega = 0.5;
    c.init.p = 0.5;
    return c;
}

void SamplerConfig::validate(std::size_t k) const {
    if (n_samples == 0) throw std::invalid_argument("n_samples must be positive");
    if (n_chains == 0) throw std::invalid_argument("n_chains must be positive");
    if (burn_in >= n_samples) throw std::invalid_argument("burn_in must be smaller than n_samples");
    if (!(sigma_phi >= 0.0)) throw std::invalid_argument("sigma_phi must be non-negative");
    if (static_cast<std::size_t>(sigma_j_diag.size()) != k)
        throw std::invalid_argument("sigma_j length does not match k");
    if ((sigma_j_diag.array() < 0.0).any())
        throw std::invalid_argument("sigma_j entries must be non-negative");
    if (static_cast<std::size_t>(init.beta.size()) != k)
        throw std::invalid_argument("initial beta length does not match k");
    init.validate();
}

ChainState ChainState::initial(const FBRParams& init, const Dataset& data) {
    init.validate();
    ChainState s;
    s.params = init;
    s.mu = mu_of(init.beta, data.X());
    s.omega_tilde = omega_tilde_of(init.omega, s.mu, init.p);
    s.alloc = Allocation::all_ones(data.n());
    if (!std::isfinite(loglik(init, data)))
        throw std::runtime_error("log-likelihood is not finite at the initial parameters");
    return s;
}

std::size_t ChainDraws::accept_phi() const {
    return static_cast<std::size_t>(std::count(accepted_phi.begin(), accepted_phi.end(), 1));
}

std::size_t ChainDraws::accept_beta() const {
    return static_cast<std::size_t>(std::count(accepted_beta.begin(), accepted_beta.end(), 1));
}

ChainError::ChainError(std::size_t chain_id, const std::string& what)
    : std::runtime_error("chain " + std::to_string(chain_id) + ": " + what), chain_id_(chain_id) {}

double allocation_probability(double y, double lambda1, double lambda2, double phi, double p) {
    const double ly = std::log(y);
    const double l1y = std::log1p(-y);
    const double lg = std::lgamma(phi);
    const double a = std::log(p) + log_beta_mp_unchecked(ly, l1y, lambda1, phi, lg);
    const double b = std::log1p(-p) + log_beta_mp_unchecked(ly, l1y, lambda2, phi, lg);
    return 1.0 / (1.0 + std::exp(b - a));
}

Allocation draw_v(const Dataset& data, const Eigen::VectorXd& lambda1,
                  const Eigen::VectorXd& lambda2, double phi, double p, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<unsigned char> v(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double prob = allocation_probability(data.y()[i], lambda1[i], lambda2[i], phi, p);
        v[i] = unif(rng) < prob ? 1 : 0;
    }
    return Allocation::from_labels(std::move(v));
}

Allocation draw_v(const ChainState& state, const Dataset& data, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double phi = state.params.phi;
    const double p = state.params.p;
    const double lg = std::lgamma(phi);
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    std::vector<unsigned char> v(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double l1 = state.mu[i] + (1.0 - p) * state.omega_tilde[i];
        const double l2 = state.mu[i] - p * state.omega_tilde[i];
        const double ly = data.log_y()[i];
        const double l1y = data.log1m_y()[i];
        const double a = log_p + log_beta_mp_unchecked(ly, l1y, l1, phi, lg);
        const double b = log_q + log_beta_mp_unchecked(ly, l1y, l2, phi, lg);
        v[i] = unif(rng) < 1.0 / (1.0 + std::exp(b - a)) ? 1 : 0;
    }
    return Allocation::from_labels(std::move(v));
}

double draw_p(const Allocation& alloc, Rng& rng) {
    return sample_beta(static_cast<double>(alloc.n1) + 1.0, static_cast<double>(alloc.n0) + 1.0,
                       rng);
}

OmegaDraw draw_omega(const Eigen::VectorXd& mu, double p, Rng& rng, OmegaStyle style) {
    const double u = uniform_open(rng);
    OmegaDraw out{u, Eigen::VectorXd(mu.size())};
    if (style == OmegaStyle::Vector) {
        for (Eigen::Index i = 0; i < mu.size(); ++i) out.omega_tilde[i] = u * omega_tilde_cap(mu[i], p);
    } else {
        double cap = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < mu.size(); ++i) cap = std::min(cap, omega_tilde_cap(mu[i], p));
        out.omega_tilde.setConstant(u * cap);
    }
    return out;
}

PhiStep mh_phi(const ChainState& state, const Dataset& data, const PriorConfig& prior,
               double sigma_phi, Rng& rng, double current_loglik) {
    const double phi = state.params.phi;
    const double p = state.params.p;
    if (std::isnan(current_loglik))
        current_loglik = loglik_complete(state.mu, state.omega_tilde, phi, p, state.alloc, data);

    std::normal_distribution<double> normal(0.0, 1.0);
    const double proposal = phi + sigma_phi * normal(rng);
    if (!(proposal > 0.0)) return {phi, false, current_loglik};

    const double proposed_loglik =
        loglik_complete(state.mu, state.omega_tilde, proposal, p, state.alloc, data);
    const double log_ratio = (proposed_loglik + log_prior_phi(proposal, prior)) -
                             (current_loglik + log_prior_phi(phi, prior));
    if (proposed_loglik != kNegInf && metropolis_accept(log_ratio, rng))
        return {proposal, true, proposed_loglik};
    return {phi, false, current_loglik};
}

BetaStep mh_beta(const ChainState& state, const Dataset& data, const PriorConfig& prior,
                 const Eigen::VectorXd& sigma_j_diag, Rng& rng, double current_loglik) {
    const FBRParams& cur = state.params;
    if (std::isnan(current_loglik))
        current_loglik =
            loglik_complete(state.mu, state.omega_tilde, cur.phi, cur.p, state.alloc, data);

    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd proposal(cur.beta.size());
    for (Eigen::Index r = 0; r < proposal.size(); ++r)
        proposal[r] = cur.beta[r] + std::sqrt(sigma_j_diag[r]) * normal(rng);

    Eigen::VectorXd mu = mu_of(proposal, data.X());
    const double proposed_loglik =
        loglik_complete(mu, state.omega_tilde, cur.phi, cur.p, state.alloc, data);
    if (proposed_loglik == kNegInf) return {cur.beta, state.mu, false, current_loglik};

    const double log_ratio = (proposed_loglik + log_prior_beta(proposal, prior)) -
                             (current_loglik + log_prior_beta(cur.beta, prior));
    if (metropolis_accept(log_ratio, rng))
        return {std::move(proposal), std::move(mu), true, proposed_loglik};
    return {cur.beta, state.mu, false, current_loglik};
}

std::pair<bool, bool> sweep(ChainState& state, const Dataset& data, const PriorConfig& prior,
                            const SamplerConfig& config, Rng& rng) {
    state.alloc = draw_v(state, data, rng);
    state.params.p = draw_p(state.alloc, rng);
    state.mu = mu_of(state.params.beta, data.X());
    OmegaDraw w = draw_omega(state.mu, state.params.p, rng, config.omega_style);
    state.params.omega = w.omega;
    state.omega_tilde = std::move(w.omega_tilde);

    const PhiStep phi_step = mh_phi(state, data, prior, config.sigma_phi, rng);
    state.params.phi = phi_step.phi;

    BetaStep beta_step = mh_beta(state, data, prior, config.sigma_j_diag, rng, phi_step.loglik);
    if (beta_step.accepted) {
        state.params.beta = std::move(beta_step.beta);
        state.mu = std::move(beta_step.mu);
    }
    return {phi_step.accepted, beta_step.accepted};
}

ChainDraws run_chain(const Dataset& data, const PriorConfig& prior, const SamplerConfig& config,
                     std::size_t chain_id) {
    config.validate(data.k());
    prior.validate(data.k());
    Rng rng = make_rng(config.seed, chain_id);
    ChainState state = ChainState::initial(config.init, data);

    const auto n = static_cast<Eigen::Index>(config.n_samples);
    ChainDraws out;
    out.chain_id = chain_id;
    out.beta.resize(n, static_cast<Eigen::Index>(data.k()));
    out.phi.resize(n);
    out.omega.resize(n);
    out.p.resize(n);
    out.accepted_phi.resize(config.n_samples);
    out.accepted_beta.resize(config.n_samples);

    for (Eigen::Index j = 0; j < n; ++j) {
        const auto [acc_phi, acc_beta] = sweep(state, data, prior, config, rng);
        out.beta.row(j) = state.params.beta.transpose();
        out.phi[j] = state.params.phi;
        out.omega[j] = state.params.omega;
        out.p[j] = state.params.p;
        out.accepted_phi[static_cast<std::size_t>(j)] = acc_phi;
        out.accepted_beta[static_cast<std::size_t>(j)] = acc_beta;
    }
    out.final_alloc = std::move(state.alloc);
    return out;
}

std::vector<ChainDraws> run_chains(const Dataset& data, const PriorConfig& prior,
                                   const SamplerConfig& config) {
    config.validate(data.k());
    prior.validate(data.k());
    std::vector<ChainDraws> chains(config.n_chains);
    std::vector<std::exception_ptr> errors(config.n_chains);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t id = next++; id < config.n_chains; id = next++) {
            try {
                chains[id] = run_chain(data, prior, config, id);
            } catch (...) {
                errors[id] = std::current_exception();
            }
        }
    };

    const std::size_t n_threads = std::clamp<std::size_t>(config.n_threads, 1, config.n_chains);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }

    for (std::size_t id = 0; id < config.n_chains; ++id) {
        if (!errors[id]) continue;
        try {
            std::rethrow_exception(errors[id]);
        } catch (const std::exception& e) {
            throw ChainError(id, e.what());
        }
    }
    return chains;
}

}  // namespace fbreg
