#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fbreg/rng.hpp"
#include "fbreg/sampler.hpp"

namespace fbreg {

/// Thrown by acf for a series with zero variance.
class DegenerateSeriesError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by thin when the requested spacing cannot be honoured.
class ThinningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultMaxLag = 50;

/// Gap used when autocorrelation analysis is skipped.
inline constexpr std::size_t kDefaultGap = 15;

struct AcfResult {
    std::vector<double> rho;  ///< rho[l] for l = 0..max_lag
    std::size_t n = 0;
    double band = 0.0;        ///< 1.96 / sqrt(n)

    std::size_t max_lag() const { return rho.empty() ? 0 : rho.size() - 1; }
};

/// Sample autocorrelation with the biased (1/n) denominator.
AcfResult acf(std::span<const double> series, std::size_t max_lag = kDefaultMaxLag);

/// Largest lag l >= 1 with |rho[l]| > band, 0 if none.
std::size_t largest_significant_lag(const AcfResult& acf);

/// Length of the run of significant lags starting at lag 1: the largest l such
/// that every lag 1..l lies outside the band. Isolated excursions at long lags
/// (which white noise produces at the nominal 5% rate) do not count.
std::size_t dependence_lag(const AcfResult& acf);

/// Parameter columns in a fixed order: beta0..beta{k-1}, phi, omega, p.
std::vector<std::string> parameter_names(std::size_t k);
Eigen::MatrixXd parameter_matrix(const ChainDraws& draws);

/// Drops the first n_burn draws of every trace. Throws std::length_error when
/// nothing would remain.
ChainDraws burn(const ChainDraws& draws, std::size_t n_burn);

/// Splits [0, length) into `count` segments of floor(length / count) draws and
/// picks one index per segment. In every segment after the first, the first
/// gap - 1 positions are excluded, so consecutive picks are at least `gap`
/// apart. Throws ThinningError when count * gap > length.
std::vector<std::size_t> thin_indices(std::size_t length, std::size_t gap, std::size_t count,
                                      Rng& rng);

struct ThinnedSample {
    std::vector<std::string> names;
    Eigen::MatrixXd values;                                ///< one row per retained draw
    std::vector<std::pair<std::size_t, std::size_t>> source;  ///< (chain id, original draw index)
    std::size_t gap = 1;

    std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
    Eigen::VectorXd column(const std::string& name) const;
    /// Columns beta0..beta{k-1} as a matrix.
    Eigen::MatrixXd beta() const;
};

ThinnedSample thin(const ChainDraws& post_burn, std::size_t gap, std::size_t count, Rng& rng);

/// Concatenates per-chain samples in the order given.
ThinnedSample pool(const std::vector<ThinnedSample>& parts);

/// Maximum dependence_lag over every chain and parameter (at least 1). Traces
/// with zero variance are skipped.
std::size_t auto_gap(const std::vector<ChainDraws>& post_burn, std::size_t max_lag = kDefaultMaxLag);

/// Linear-interpolation quantile (R type 7) of an unsorted sample.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

struct ParamSummary {
    std::string name;
    double median;
    double mean;
    double lo95;
    double hi95;
    double min;
    double max;
};

std::vector<ParamSummary> summarize(const ThinnedSample& sample);

struct AcceptanceReport {
    std::size_t chain_id;
    double phi_rate;
    double beta_rate;
    std::vector<std::string> warnings;  ///< rates outside (0.1, 0.7)
};

AcceptanceReport acceptance(const ChainDraws& draws);

}  // namespace fbreg
