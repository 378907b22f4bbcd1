#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fbreg/diagnostics.hpp"
#include "fbreg/estimation.hpp"
#include "fbreg/model.hpp"
#include "fbreg/sampler.hpp"

namespace fbreg {

inline constexpr const char* kVersion = "0.1.0";

/// Malformed input file. `line` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Error raised by one of the cmd_* pipelines, prefixed with the failing stage.
class StageError : public std::runtime_error {
public:
    StageError(const std::string& stage, const std::string& what);
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// ---------------------------------------------------------------------------
// Datasets

/// Maps [0,1] into (0,1): y' = (y (n - 1) + 0.5) / n.
double squeeze_response(double y, std::size_t n);

struct LoadedDataset {
    Dataset data;
    std::size_t rows = 0;
    std::size_t boundary_rows = 0;  ///< rows with y at 0 or 1 (squeezed when enabled)
};

/// Reads a `y,z` CSV. Responses equal to 0 or 1 are an error unless `squeeze`
/// is set, in which case every response is squeezed. Responses outside [0,1]
/// are always an error.
LoadedDataset load_dataset(const std::filesystem::path& path, bool squeeze = false);

void write_dataset(const std::filesystem::path& path, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& z);

// ---------------------------------------------------------------------------
// Synthetic data

struct SimulationSpec {
    FBRParams truth;
    std::size_t n = 2000;
    double z_min = -1.5;
    double z_max = 0.5;
    std::uint64_t seed = 1;

    /// The scenario shipped with the repository: beta = (0.6, 1.1), phi = 30,
    /// omega = 0.5, p = 0.7, z ~ U(-1.5, 0.5), n = 2000.
    static SimulationSpec shipped_default();
    void validate() const;
};

struct SimulatedData {
    Eigen::VectorXd y;
    Eigen::VectorXd z;
    std::vector<int> labels;
    Eigen::VectorXd mu;
    Eigen::VectorXd omega_tilde;
    Eigen::VectorXd lambda1;
    Eigen::VectorXd lambda2;

    Dataset dataset() const { return Dataset::from_covariate(y, z); }
};

SimulatedData simulate(const SimulationSpec& spec);

/// Writes dataset.csv, truth.csv (per-observation labels and component means)
/// and truth.txt (parameters and seed) into `dir`.
void write_simulation(const std::filesystem::path& dir, const SimulationSpec& spec,
                      const SimulatedData& sim);

// ---------------------------------------------------------------------------
// Key-value documents (summary.txt, manifest.txt, truth.txt)

using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(const std::filesystem::path& path);

/// Shortest round-trippable decimal text (17 significant digits).
std::string format_number(double x);

// ---------------------------------------------------------------------------
// Runs

struct RunConfig {
    std::filesystem::path data_path;
    std::filesystem::path out_dir;
    PriorConfig prior = PriorConfig::defaults(2);
    SamplerConfig sampler = SamplerConfig::defaults(2);
    bool init_beta_from_ols = true;      ///< overwrite sampler.init.beta with the OLS fit
    std::optional<std::size_t> gap;      ///< nullopt = derived from the ACF
    std::size_t per_chain_count = 500;
    std::size_t max_lag = kDefaultMaxLag;
    bool squeeze = false;
    std::size_t grid_points = 200;

    void validate() const;
};

/// Writes every field needed to rerun `config` plus provenance lines.
void write_manifest(const std::filesystem::path& path, const RunConfig& config,
                    double wall_seconds);

/// Reads a manifest back into a RunConfig. The OLS initialisation is already
/// resolved in a manifest, so the returned config carries explicit init values.
RunConfig read_manifest(const std::filesystem::path& path);

struct RunArtifacts {
    std::filesystem::path out_dir;
    std::vector<ChainDraws> chains;
    std::vector<ChainDraws> post_burn;
    std::size_t gap_auto = 0;
    std::size_t gap = 0;
    bool gap_capped = false;
    ThinnedSample thinned;
    std::vector<ParamSummary> summary;
    FBREstimate estimate;
    OlsFit ols;
    std::size_t fbr_out_of_range = 0;
    std::vector<AcceptanceReport> acceptance;
    std::vector<std::string> warnings;
};

/// Sample, burn, thin, estimate and write the run directory.
RunArtifacts cmd_fit(const RunConfig& config);

struct PredictionRow {
    double z;
    double mu;
    double lambda1;
    double lambda2;
};

/// Reads the estimate from `run_dir`/summary.txt and evaluates the curves.
std::vector<PredictionRow> cmd_predict(const std::filesystem::path& run_dir,
                                       const std::vector<double>& z);

/// Parses `--z` input: a path to a file of numbers (one per line, or a CSV with
/// a `z` column) or a comma-separated list.
std::vector<double> parse_z_values(const std::string& arg);

struct LagReport {
    std::size_t chain_id;
    std::string param;
    std::optional<std::size_t> dependence;   ///< nullopt for a constant trace
    std::optional<std::size_t> largest;
};

struct DiagnoseReport {
    std::vector<LagReport> lags;
    std::vector<AcceptanceReport> acceptance;
    std::vector<std::string> warnings;
};

/// Reads draws_chain<k>.csv from `run_dir`, drops `burn_in` draws (taken from
/// manifest.txt when not given), writes ACF tables and diagnose.txt.
DiagnoseReport cmd_diagnose(const std::filesystem::path& run_dir,
                            std::optional<std::size_t> burn_in = std::nullopt,
                            std::size_t max_lag = kDefaultMaxLag);

/// Draw file IO; the column layout is iter, beta0..beta{k-1}, phi, omega, p,
/// accept_phi, accept_beta.
void write_draws(const std::filesystem::path& path, const ChainDraws& draws);
ChainDraws read_draws(const std::filesystem::path& path, std::size_t chain_id);

void write_acf(const std::filesystem::path& path, const AcfResult& acf);

}  // namespace fbreg
