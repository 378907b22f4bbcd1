#include "fbreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>
#include <utility>

namespace fbreg {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

double parse_number(const std::string& s, const std::string& file, std::size_t line) {
    if (auto v = parse_double(s)) return *v;
    throw ParseError(file, line, "not a finite number: '" + s + "'");
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

/// Ordered key-value lines, rendered as `key = value`.
class KeyValueWriter {
public:
    void comment(const std::string& text) { lines_.push_back("# " + text); }
    void put(const std::string& key, const std::string& value) {
        lines_.push_back(key + " = " + value);
    }
    void put(const std::string& key, double value) { put(key, format_number(value)); }
    void put(const std::string& key, std::size_t value) { put(key, std::to_string(value)); }
    void put_vector(const std::string& key, const Eigen::VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) put(key + "." + std::to_string(i), v[i]);
    }
    void write(const fs::path& path) const {
        auto out = open_out(path);
        for (const auto& l : lines_) out << l << '\n';
    }

private:
    std::vector<std::string> lines_;
};

const std::string& require(const KeyValues& kv, const std::string& key, const fs::path& file) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(file.string(), 0, "missing key '" + key + "'");
    return it->second;
}

double require_number(const KeyValues& kv, const std::string& key, const fs::path& file) {
    return parse_number(require(kv, key, file), file.string(), 0);
}

std::size_t require_count(const KeyValues& kv, const std::string& key, const fs::path& file) {
    const double v = require_number(kv, key, file);
    if (v < 0.0 || v != std::floor(v))
        throw ParseError(file.string(), 0, "key '" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
}

Eigen::VectorXd require_vector(const KeyValues& kv, const std::string& key, std::size_t k,
                               const fs::path& file) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i)
        v[static_cast<Eigen::Index>(i)] = require_number(kv, key + "." + std::to_string(i), file);
    return v;
}

template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

fs::path draws_file(const fs::path& dir, std::size_t chain) {
    return dir / ("draws_chain" + std::to_string(chain) + ".csv");
}

fs::path acf_file(const fs::path& dir, const std::string& param, std::size_t chain) {
    return dir / ("acf_" + param + "_chain" + std::to_string(chain) + ".csv");
}

struct ChainAcf {
    std::vector<LagReport> lags;
    std::vector<std::string> warnings;
};

/// ACF tables for every parameter of one post-burn chain.
ChainAcf chain_acf(const fs::path& dir, const ChainDraws& chain, std::size_t max_lag) {
    ChainAcf out;
    const Eigen::MatrixXd m = parameter_matrix(chain);
    const auto names = parameter_names(chain.k());
    const std::size_t lag_cap = chain.size() > 1 ? std::min(max_lag, chain.size() - 1) : 0;
    for (std::size_t c = 0; c < names.size(); ++c) {
        const Eigen::VectorXd col = m.col(static_cast<Eigen::Index>(c));
        LagReport rep{chain.chain_id, names[c], std::nullopt, std::nullopt};
        try {
            const AcfResult a = acf({col.data(), chain.size()}, lag_cap);
            write_acf(acf_file(dir, names[c], chain.chain_id), a);
            rep.dependence = dependence_lag(a);
            rep.largest = largest_significant_lag(a);
        } catch (const std::exception& e) {
            out.warnings.push_back("chain " + std::to_string(chain.chain_id) + " " + names[c] +
                                   ": " + e.what());
        }
        out.lags.push_back(rep);
    }
    return out;
}

}  // namespace

ParseError::ParseError(const std::string& file, std::size_t line, const std::string& what)
    : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line) {}

StageError::StageError(const std::string& stage, const std::string& what)
    : std::runtime_error(stage + ": " + what), stage_(stage) {}

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---------------------------------------------------------------------------

double squeeze_response(double y, std::size_t n) {
    const double nn = static_cast<double>(n);
    return (y * (nn - 1.0) + 0.5) / nn;
}

LoadedDataset load_dataset(const fs::path& path, bool squeeze) {
    auto in = open_in(path);
    const std::string file = path.string();
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError(file, 1, "empty file (expected header 'y,z')");
    ++line_no;
    const auto header = split_csv(line);
    if (header.size() != 2 || header[0] != "y" || header[1] != "z")
        throw ParseError(file, 1, "expected header 'y,z', got '" + trim(line) + "'");

    std::vector<double> ys, zs;
    std::vector<std::size_t> boundary;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 2)
            throw ParseError(file, line_no, "expected 2 fields, got " + std::to_string(fields.size()));
        const double y = parse_number(fields[0], file, line_no);
        const double z = parse_number(fields[1], file, line_no);
        if (y < 0.0 || y > 1.0)
            throw ParseError(file, line_no, "response " + fields[0] + " outside [0,1]");
        if (y == 0.0 || y == 1.0) boundary.push_back(line_no);
        ys.push_back(y);
        zs.push_back(z);
    }
    if (ys.empty()) throw ParseError(file, 0, "dataset has no rows");

    if (!boundary.empty() && !squeeze) {
        std::ostringstream os;
        os << boundary.size() << " response(s) on the boundary {0,1} at line(s)";
        for (std::size_t i = 0; i < std::min<std::size_t>(boundary.size(), 20); ++i)
            os << ' ' << boundary[i];
        if (boundary.size() > 20) os << " ...";
        os << "; rerun with squeeze enabled to map responses into (0,1)";
        throw ParseError(file, boundary.front(), os.str());
    }

    const std::size_t n = ys.size();
    Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd z = Eigen::Map<Eigen::VectorXd>(zs.data(), static_cast<Eigen::Index>(n));
    if (squeeze) y = y.unaryExpr([n](double v) { return squeeze_response(v, n); });
    return {Dataset::from_covariate(y, z), n, boundary.size()};
}

void write_dataset(const fs::path& path, const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
    auto out = open_out(path);
    out << "y,z\n";
    for (Eigen::Index i = 0; i < y.size(); ++i)
        out << format_number(y[i]) << ',' << format_number(z[i]) << '\n';
}

// ---------------------------------------------------------------------------

SimulationSpec SimulationSpec::shipped_default() {
    SimulationSpec s;
    s.truth.beta = Eigen::Vector2d(0.6, 1.1);
    s.truth.phi = 30.0;
    s.truth.omega = 0.5;
    s.truth.p = 0.7;
    s.n = 2000;
    s.z_min = -1.5;
    s.z_max = 0.5;
    s.seed = 1;
    return s;
}

void SimulationSpec::validate() const {
    truth.validate();
    if (truth.beta.size() != 2) throw std::invalid_argument("simulation expects beta = (b0, b1)");
    if (n == 0) throw std::invalid_argument("simulation size must be positive");
    if (!(z_min < z_max) || !std::isfinite(z_min) || !std::isfinite(z_max))
        throw std::invalid_argument("simulation needs finite z_min < z_max");
}

SimulatedData simulate(const SimulationSpec& spec) {
    spec.validate();
    Rng rng = make_rng(spec.seed, 0, Stream::Simulation);
    std::uniform_real_distribution<double> unif(spec.z_min, spec.z_max);
    const auto n = static_cast<Eigen::Index>(spec.n);
    SimulatedData sim;
    sim.y.resize(n);
    sim.z.resize(n);
    sim.mu.resize(n);
    sim.omega_tilde.resize(n);
    sim.lambda1.resize(n);
    sim.lambda2.resize(n);
    sim.labels.resize(spec.n);
    for (Eigen::Index i = 0; i < n; ++i) {
        sim.z[i] = unif(rng);
        const FBMeanParam m{inv_logit(spec.truth.beta[0] + spec.truth.beta[1] * sim.z[i]),
                            spec.truth.phi, spec.truth.omega, spec.truth.p};
        const FlexibleBeta fb = m.to_flexible_beta();
        const FBDraw d = sample_fb(fb, rng);
        sim.y[i] = d.y;
        sim.labels[static_cast<std::size_t>(i)] = d.component;
        sim.mu[i] = m.mu;
        sim.omega_tilde[i] = m.omega_tilde();
        sim.lambda1[i] = fb.lambda1();
        sim.lambda2[i] = fb.lambda2();
    }
    return sim;
}

void write_simulation(const fs::path& dir, const SimulationSpec& spec, const SimulatedData& sim) {
    fs::create_directories(dir);
    write_dataset(dir / "dataset.csv", sim.y, sim.z);

    auto out = open_out(dir / "truth.csv");
    out << "i,z,y,label,mu,omega_tilde,lambda1,lambda2\n";
    for (Eigen::Index i = 0; i < sim.y.size(); ++i) {
        out << i << ',' << format_number(sim.z[i]) << ',' << format_number(sim.y[i]) << ','
            << sim.labels[static_cast<std::size_t>(i)] << ',' << format_number(sim.mu[i]) << ','
            << format_number(sim.omega_tilde[i]) << ',' << format_number(sim.lambda1[i]) << ','
            << format_number(sim.lambda2[i]) << '\n';
    }

    KeyValueWriter kv;
    kv.comment("fbreg simulation ground truth");
    kv.put("version", std::string(kVersion));
    kv.put("n", spec.n);
    kv.put("seed", std::to_string(spec.seed));
    kv.put("z_min", spec.z_min);
    kv.put("z_max", spec.z_max);
    kv.put_vector("beta", spec.truth.beta);
    kv.put("phi", spec.truth.phi);
    kv.put("omega", spec.truth.omega);
    kv.put("p", spec.truth.p);
    kv.write(dir / "truth.txt");
}

// ---------------------------------------------------------------------------

KeyValues read_key_values(const fs::path& path) {
    auto in = open_in(path);
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError(path.string(), line_no, "expected 'key = value'");
        kv[trim(std::string_view(t).substr(0, eq))] = trim(std::string_view(t).substr(eq + 1));
    }
    return kv;
}

void RunConfig::validate() const {
    sampler.validate(2);
    prior.validate(2);
    if (per_chain_count == 0) throw std::invalid_argument("per-chain count must be positive");
    if (gap && *gap == 0) throw std::invalid_argument("gap must be at least 1");
    if (max_lag == 0) throw std::invalid_argument("max_lag must be positive");
    if (grid_points < 2) throw std::invalid_argument("grid needs at least two points");
    if (!fs::exists(data_path))
        throw std::invalid_argument("dataset '" + data_path.string() + "' does not exist");
    if (out_dir.empty()) throw std::invalid_argument("output directory not set");
}

void write_manifest(const fs::path& path, const RunConfig& c, double wall_seconds) {
    KeyValueWriter kv;
    kv.comment("fbreg run manifest; `fbreg fit --manifest <this file>` reproduces the run");
    kv.put("version", std::string(kVersion));
    kv.put("data", fs::absolute(c.data_path).lexically_normal().string());
    kv.put("squeeze", std::size_t{c.squeeze});
    kv.put("k", static_cast<std::size_t>(c.sampler.init.beta.size()));
    kv.put("seed", std::to_string(c.sampler.seed));
    kv.put("chains", c.sampler.n_chains);
    kv.put("samples", c.sampler.n_samples);
    kv.put("burn", c.sampler.burn_in);
    kv.put("sigma_phi", c.sampler.sigma_phi);
    kv.put_vector("sigma_j", c.sampler.sigma_j_diag);
    kv.put("omega_style", to_string(c.sampler.omega_style));
    kv.put_vector("init.beta", c.sampler.init.beta);
    kv.put("init.phi", c.sampler.init.phi);
    kv.put("init.omega", c.sampler.init.omega);
    kv.put("init.p", c.sampler.init.p);
    kv.put_vector("sigma_beta", c.prior.sigma_beta_diag);
    kv.put("kappa", c.prior.kappa);
    kv.put("g", c.prior.g);
    kv.put("gap", c.gap ? std::to_string(*c.gap) : std::string("auto"));
    kv.put("per_chain_count", c.per_chain_count);
    kv.put("max_lag", c.max_lag);
    kv.put("grid_points", c.grid_points);
    kv.put("threads", c.sampler.n_threads);
    kv.put("wall_seconds", wall_seconds);
    kv.write(path);
}

RunConfig read_manifest(const fs::path& path) {
    const KeyValues kv = read_key_values(path);
    const std::size_t k = require_count(kv, "k", path);
    RunConfig c;
    c.data_path = require(kv, "data", path);
    c.out_dir = path.parent_path();
    c.squeeze = require_count(kv, "squeeze", path) != 0;
    c.sampler.seed = std::stoull(require(kv, "seed", path));
    c.sampler.n_chains = require_count(kv, "chains", path);
    c.sampler.n_samples = require_count(kv, "samples", path);
    c.sampler.burn_in = require_count(kv, "burn", path);
    c.sampler.sigma_phi = require_number(kv, "sigma_phi", path);
    c.sampler.sigma_j_diag = require_vector(kv, "sigma_j", k, path);
    c.sampler.omega_style = parse_omega_style(require(kv, "omega_style", path));
    c.sampler.init.beta = require_vector(kv, "init.beta", k, path);
    c.sampler.init.phi = require_number(kv, "init.phi", path);
    c.sampler.init.omega = require_number(kv, "init.omega", path);
    c.sampler.init.p = require_number(kv, "init.p", path);
    c.sampler.n_threads = require_count(kv, "threads", path);
    c.prior.sigma_beta_diag = require_vector(kv, "sigma_beta", k, path);
    c.prior.kappa = require_number(kv, "kappa", path);
    c.prior.g = require_number(kv, "g", path);
    const std::string& gap = require(kv, "gap", path);
    if (gap != "auto") c.gap = require_count(kv, "gap", path);
    c.per_chain_count = require_count(kv, "per_chain_count", path);
    c.max_lag = require_count(kv, "max_lag", path);
    c.grid_points = require_count(kv, "grid_points", path);
    c.init_beta_from_ols = false;
    return c;
}

// ---------------------------------------------------------------------------

void write_draws(const fs::path& path, const ChainDraws& d) {
    auto out = open_out(path);
    out << "iter";
    for (const auto& name : parameter_names(d.k())) out << ',' << name;
    out << ",accept_phi,accept_beta\n";
    const Eigen::MatrixXd m = parameter_matrix(d);
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
        out << d.offset + static_cast<std::size_t>(j);
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << format_number(m(j, c));
        out << ',' << int{d.accepted_phi[static_cast<std::size_t>(j)]} << ','
            << int{d.accepted_beta[static_cast<std::size_t>(j)]} << '\n';
    }
}

ChainDraws read_draws(const fs::path& path, std::size_t chain_id) {
    auto in = open_in(path);
    const std::string file = path.string();
    std::string line;
    if (!std::getline(in, line)) throw ParseError(file, 1, "empty draw file");
    const auto header = split_csv(line);
    if (header.size() < 7 || header.front() != "iter" || header[header.size() - 2] != "accept_phi" ||
        header.back() != "accept_beta")
        throw ParseError(file, 1, "unexpected draw file header");
    const std::size_t k = header.size() - 6;
    if (header[k + 1] != "phi" || header[k + 2] != "omega" || header[k + 3] != "p")
        throw ParseError(file, 1, "unexpected draw file header");

    std::vector<std::vector<double>> rows;
    std::vector<unsigned char> acc_phi, acc_beta;
    std::size_t first_iter = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != header.size())
            throw ParseError(file, line_no, "expected " + std::to_string(header.size()) + " fields");
        if (rows.empty()) first_iter = static_cast<std::size_t>(parse_number(f[0], file, line_no));
        std::vector<double> r(k + 3);
        for (std::size_t c = 0; c < k + 3; ++c) r[c] = parse_number(f[c + 1], file, line_no);
        rows.push_back(std::move(r));
        acc_phi.push_back(parse_number(f[k + 4], file, line_no) != 0.0);
        acc_beta.push_back(parse_number(f[k + 5], file, line_no) != 0.0);
    }
    if (rows.empty()) throw ParseError(file, 0, "draw file has no rows");

    const auto n = static_cast<Eigen::Index>(rows.size());
    ChainDraws d;
    d.chain_id = chain_id;
    d.offset = first_iter;
    d.beta.resize(n, static_cast<Eigen::Index>(k));
    d.phi.resize(n);
    d.omega.resize(n);
    d.p.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& r = rows[static_cast<std::size_t>(j)];
        for (std::size_t c = 0; c < k; ++c) d.beta(j, static_cast<Eigen::Index>(c)) = r[c];
        d.phi[j] = r[k];
        d.omega[j] = r[k + 1];
        d.p[j] = r[k + 2];
    }
    d.accepted_phi = std::move(acc_phi);
    d.accepted_beta = std::move(acc_beta);
    return d;
}

void write_acf(const fs::path& path, const AcfResult& a) {
    auto out = open_out(path);
    out << "lag,rho,band\n";
    for (std::size_t l = 0; l < a.rho.size(); ++l)
        out << l << ',' << format_number(a.rho[l]) << ',' << format_number(a.band) << '\n';
}

// ---------------------------------------------------------------------------

RunArtifacts cmd_fit(const RunConfig& cfg_in) {
    const auto start = std::chrono::steady_clock::now();
    RunConfig cfg = cfg_in;
    stage("config", [&] { cfg.validate(); });
    fs::create_directories(cfg.out_dir);

    const LoadedDataset loaded = stage("load", [&] { return load_dataset(cfg.data_path, cfg.squeeze); });
    const Dataset& data = loaded.data;

    RunArtifacts art;
    art.out_dir = cfg.out_dir;
    art.ols = stage("ols", [&] { return ols_fit(data); });
    if (cfg.init_beta_from_ols) cfg.sampler.init.beta = Eigen::Vector2d(art.ols.beta0, art.ols.beta1);

    art.chains = stage("sample", [&] { return run_chains(data, cfg.prior, cfg.sampler); });
    stage("write draws", [&] {
        for (const auto& c : art.chains) write_draws(draws_file(cfg.out_dir, c.chain_id), c);
    });

    stage("burn", [&] {
        for (const auto& c : art.chains) art.post_burn.push_back(burn(c, cfg.sampler.burn_in));
    });

    stage("acf", [&] {
        for (const auto& c : art.post_burn) {
            ChainAcf a = chain_acf(cfg.out_dir, c, cfg.max_lag);
            art.warnings.insert(art.warnings.end(), a.warnings.begin(), a.warnings.end());
        }
        art.gap_auto = auto_gap(art.post_burn, cfg.max_lag);
    });

    const std::size_t length = art.post_burn.front().size();
    if (cfg.gap) {
        art.gap = *cfg.gap;
    } else {
        art.gap = art.gap_auto;
        const std::size_t feasible = length / cfg.per_chain_count;
        if (art.gap > feasible && feasible >= 1) {
            art.gap = feasible;
            art.gap_capped = true;
            art.warnings.push_back("autocorrelation gap " + std::to_string(art.gap_auto) +
                                   " exceeds the largest feasible gap " + std::to_string(feasible) +
                                   " for " + std::to_string(cfg.per_chain_count) + " of " +
                                   std::to_string(length) + " draws per chain; using " +
                                   std::to_string(feasible));
        }
    }

    art.thinned = stage("thin", [&] {
        std::vector<ThinnedSample> parts;
        for (const auto& c : art.post_burn) {
            Rng rng = make_rng(cfg.sampler.seed, c.chain_id, Stream::Thinning);
            parts.push_back(thin(c, art.gap, cfg.per_chain_count, rng));
        }
        return pool(parts);
    });

    stage("estimate", [&] {
        art.summary = summarize(art.thinned);
        art.estimate = point_estimate(art.thinned, data);
        for (const auto& c : art.post_burn) {
            art.acceptance.push_back(acceptance(c));
            const auto& w = art.acceptance.back().warnings;
            art.warnings.insert(art.warnings.end(), w.begin(), w.end());
        }
    });

    const Eigen::VectorXd z = data.z();
    const double z_min = z.minCoeff();
    const double z_max = z.maxCoeff();
    const std::vector<double> grid = z_grid(z_min, z_max, cfg.grid_points);

    stage("write results", [&] {
        const FBREstimate& e = art.estimate;
        art.fbr_out_of_range = count_out_of_range(e.mu_hat) + count_out_of_range(e.lambda1_hat) +
                               count_out_of_range(e.lambda2_hat);
        {
            auto out = open_out(cfg.out_dir / "thinned.csv");
            out << "chain,index";
            for (const auto& name : art.thinned.names) out << ',' << name;
            out << '\n';
            for (std::size_t j = 0; j < art.thinned.size(); ++j) {
                out << art.thinned.source[j].first << ',' << art.thinned.source[j].second;
                for (Eigen::Index c = 0; c < art.thinned.values.cols(); ++c)
                    out << ',' << format_number(art.thinned.values(static_cast<Eigen::Index>(j), c));
                out << '\n';
            }
        }
        {
            auto out = open_out(cfg.out_dir / "fitted.csv");
            out << "z,y,mu_hat,lambda1_hat,lambda2_hat,ols_fitted\n";
            for (Eigen::Index i = 0; i < z.size(); ++i)
                out << format_number(z[i]) << ',' << format_number(data.y()[i]) << ','
                    << format_number(e.mu_hat[i]) << ',' << format_number(e.lambda1_hat[i]) << ','
                    << format_number(e.lambda2_hat[i]) << ',' << format_number(art.ols.fitted[i])
                    << '\n';
        }
        {
            auto out = open_out(cfg.out_dir / "curves.csv");
            out << "z,mu_hat,lambda1_hat,lambda2_hat,ols\n";
            for (double zg : grid) {
                const CurvePoint cp = curves_at(e.beta_hat, e.p_hat, e.omega_hat, Eigen::Vector2d(1.0, zg));
                art.fbr_out_of_range += (cp.mu <= 0.0 || cp.mu >= 1.0) +
                                        (cp.lambda1 <= 0.0 || cp.lambda1 >= 1.0) +
                                        (cp.lambda2 <= 0.0 || cp.lambda2 >= 1.0);
                out << format_number(zg) << ',' << format_number(cp.mu) << ','
                    << format_number(cp.lambda1) << ',' << format_number(cp.lambda2) << ','
                    << format_number(art.ols.beta0 + art.ols.beta1 * zg) << '\n';
            }
        }

        KeyValueWriter kv;
        kv.comment("fbreg fit summary");
        kv.put("n", data.n());
        kv.put("k", data.k());
        kv.put("rows_on_boundary", loaded.boundary_rows);
        kv.put("chains", cfg.sampler.n_chains);
        kv.put("samples", cfg.sampler.n_samples);
        kv.put("burn", cfg.sampler.burn_in);
        kv.put("thin.gap_auto", art.gap_auto);
        kv.put("thin.gap", art.gap);
        kv.put("thin.gap_capped", std::size_t{art.gap_capped});
        kv.put("thin.per_chain", cfg.per_chain_count);
        kv.put("thin.pooled", art.thinned.size());
        kv.comment("FBR point estimate (posterior medians)");
        kv.put_vector("fbr.beta_hat", e.beta_hat);
        kv.put("fbr.phi_hat", e.phi_hat);
        kv.put("fbr.omega_hat", e.omega_hat);
        kv.put("fbr.p_hat", e.p_hat);
        kv.put("fbr.n_out_of_range", art.fbr_out_of_range);
        kv.put("fbr.regression_curve", std::string("lambda2_hat"));
        kv.comment("posterior summaries of the pooled thinned sample");
        for (const auto& s : art.summary) {
            const std::string key = "posterior." + s.name;
            kv.put(key + ".median", s.median);
            kv.put(key + ".mean", s.mean);
            kv.put(key + ".lo95", s.lo95);
            kv.put(key + ".hi95", s.hi95);
            kv.put(key + ".min", s.min);
            kv.put(key + ".max", s.max);
        }
        kv.comment("acceptance rates after burn-in");
        for (const auto& a : art.acceptance) {
            const std::string key = "acceptance.chain" + std::to_string(a.chain_id);
            kv.put(key + ".phi", a.phi_rate);
            kv.put(key + ".beta", a.beta_rate);
        }
        kv.comment("least-squares baseline");
        kv.put("ols.beta0", art.ols.beta0);
        kv.put("ols.beta1", art.ols.beta1);
        kv.put("ols.n_out_of_range", art.ols.n_out_of_range);
        for (std::size_t i = 0; i < art.warnings.size(); ++i)
            kv.put("warning." + std::to_string(i), art.warnings[i]);
        kv.write(cfg.out_dir / "summary.txt");

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_manifest(cfg.out_dir / "manifest.txt", cfg, wall);
    });
    return art;
}

// ---------------------------------------------------------------------------

std::vector<double> parse_z_values(const std::string& arg) {
    std::vector<double> out;
    if (fs::is_regular_file(arg)) {
        auto in = open_in(arg);
        std::string line;
        std::size_t line_no = 0;
        std::optional<std::size_t> column;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            const auto fields = split_csv(line);
            if (line_no == 1 && !parse_double(fields[0])) {
                const auto it = std::find(fields.begin(), fields.end(), "z");
                if (it == fields.end()) throw ParseError(arg, 1, "header has no 'z' column");
                column = static_cast<std::size_t>(std::distance(fields.begin(), it));
                continue;
            }
            const std::size_t c = column.value_or(0);
            if (c >= fields.size()) throw ParseError(arg, line_no, "missing z field");
            out.push_back(parse_number(fields[c], arg, line_no));
        }
    } else {
        std::istringstream is(arg);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            const auto v = parse_double(trim(tok));
            if (!v) throw std::invalid_argument("cannot parse z value '" + tok + "'");
            out.push_back(*v);
        }
    }
    if (out.empty()) throw std::invalid_argument("no z values given");
    return out;
}

std::vector<PredictionRow> cmd_predict(const fs::path& run_dir, const std::vector<double>& z) {
    const fs::path file = run_dir / "summary.txt";
    if (!fs::exists(file))
        throw StageError("predict", "no estimate found: '" + file.string() + "' does not exist");
    return stage("predict", [&] {
        const KeyValues kv = read_key_values(file);
        const std::size_t k = require_count(kv, "k", file);
        if (k != 2) throw std::invalid_argument("prediction from z needs a single-covariate model");
        const Eigen::VectorXd beta = require_vector(kv, "fbr.beta_hat", k, file);
        const double p = require_number(kv, "fbr.p_hat", file);
        const double omega = require_number(kv, "fbr.omega_hat", file);
        std::vector<PredictionRow> rows;
        for (double zz : z) {
            const CurvePoint cp = curves_at(beta, p, omega, Eigen::Vector2d(1.0, zz));
            rows.push_back({zz, cp.mu, cp.lambda1, cp.lambda2});
        }
        return rows;
    });
}

DiagnoseReport cmd_diagnose(const fs::path& run_dir, std::optional<std::size_t> burn_in,
                            std::size_t max_lag) {
    if (!fs::is_directory(run_dir))
        throw StageError("diagnose", "'" + run_dir.string() + "' is not a directory");

    std::vector<std::pair<std::size_t, fs::path>> files;
    const std::regex pattern(R"(draws_chain(\d+)\.csv)");
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        std::smatch m;
        const std::string name = entry.path().filename().string();
        if (std::regex_match(name, m, pattern)) files.emplace_back(std::stoul(m[1]), entry.path());
    }
    if (files.empty()) throw StageError("diagnose", "no draws_chain<k>.csv files in " + run_dir.string());
    std::sort(files.begin(), files.end());

    std::size_t n_burn = 0;
    if (burn_in) {
        n_burn = *burn_in;
    } else if (fs::exists(run_dir / "manifest.txt")) {
        n_burn = stage("diagnose", [&] {
            return require_count(read_key_values(run_dir / "manifest.txt"), "burn",
                                 run_dir / "manifest.txt");
        });
    }

    DiagnoseReport report;
    for (const auto& [id, path] : files) {
        const ChainDraws raw = stage("diagnose", [&] { return read_draws(path, id); });
        const ChainDraws post = stage("diagnose", [&] { return burn(raw, n_burn); });
        ChainAcf a = chain_acf(run_dir, post, max_lag);
        report.lags.insert(report.lags.end(), a.lags.begin(), a.lags.end());
        report.warnings.insert(report.warnings.end(), a.warnings.begin(), a.warnings.end());
        report.acceptance.push_back(acceptance(post));
        const auto& w = report.acceptance.back().warnings;
        report.warnings.insert(report.warnings.end(), w.begin(), w.end());
    }

    KeyValueWriter kv;
    kv.comment("fbreg diagnostics");
    kv.put("burn", n_burn);
    kv.put("max_lag", max_lag);
    for (const auto& l : report.lags) {
        const std::string key = "lag.chain" + std::to_string(l.chain_id) + "." + l.param;
        kv.put(key + ".dependence", l.dependence ? std::to_string(*l.dependence) : "degenerate");
        kv.put(key + ".largest", l.largest ? std::to_string(*l.largest) : "degenerate");
    }
    for (const auto& a : report.acceptance) {
        const std::string key = "acceptance.chain" + std::to_string(a.chain_id);
        kv.put(key + ".phi", a.phi_rate);
        kv.put(key + ".beta", a.beta_rate);
    }
    for (std::size_t i = 0; i < report.warnings.size(); ++i)
        kv.put("warning." + std::to_string(i), report.warnings[i]);
    kv.write(run_dir / "diagnose.txt");
    return report;
}

}  // namespace fbreg
