#include "fbreg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fbreg {

AcfResult acf(std::span<const double> series, std::size_t max_lag) {
    const std::size_t n = series.size();
    if (n <= max_lag) throw std::invalid_argument("acf: series must be longer than max_lag");
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    std::vector<double> centered(n);
    std::transform(series.begin(), series.end(), centered.begin(),
                   [mean](double x) { return x - mean; });
    const double c0 = std::inner_product(centered.begin(), centered.end(), centered.begin(), 0.0);
    if (!(c0 > 0.0)) throw DegenerateSeriesError("acf: series has zero variance");

    AcfResult out;
    out.n = n;
    out.band = 1.96 / std::sqrt(static_cast<double>(n));
    out.rho.resize(max_lag + 1);
    out.rho[0] = 1.0;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        double c = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) c += centered[t] * centered[t + lag];
        out.rho[lag] = c / c0;
    }
    return out;
}

std::size_t largest_significant_lag(const AcfResult& acf) {
    for (std::size_t lag = acf.max_lag(); lag >= 1; --lag)
        if (std::abs(acf.rho[lag]) > acf.band) return lag;
    return 0;
}

std::size_t dependence_lag(const AcfResult& acf) {
    std::size_t lag = 0;
    while (lag + 1 <= acf.max_lag() && std::abs(acf.rho[lag + 1]) > acf.band) ++lag;
    return lag;
}

std::vector<std::string> parameter_names(std::size_t k) {
    std::vector<std::string> names;
    for (std::size_t r = 0; r < k; ++r) names.push_back("beta" + std::to_string(r));
    names.insert(names.end(), {"phi", "omega", "p"});
    return names;
}

Eigen::MatrixXd parameter_matrix(const ChainDraws& draws) {
    const auto n = static_cast<Eigen::Index>(draws.size());
    const auto k = static_cast<Eigen::Index>(draws.k());
    Eigen::MatrixXd m(n, k + 3);
    m.leftCols(k) = draws.beta;
    m.col(k) = draws.phi;
    m.col(k + 1) = draws.omega;
    m.col(k + 2) = draws.p;
    return m;
}

ChainDraws burn(const ChainDraws& draws, std::size_t n_burn) {
    if (n_burn >= draws.size())
        throw std::length_error("burn-in of " + std::to_string(n_burn) +
                                " leaves no draws from a chain of length " +
                                std::to_string(draws.size()));
    const auto keep = static_cast<Eigen::Index>(draws.size() - n_burn);
    const auto skip = static_cast<std::ptrdiff_t>(n_burn);
    ChainDraws out;
    out.chain_id = draws.chain_id;
    out.offset = draws.offset + n_burn;
    out.beta = draws.beta.bottomRows(keep);
    out.phi = draws.phi.tail(keep);
    out.omega = draws.omega.tail(keep);
    out.p = draws.p.tail(keep);
    out.accepted_phi.assign(draws.accepted_phi.begin() + skip, draws.accepted_phi.end());
    out.accepted_beta.assign(draws.accepted_beta.begin() + skip, draws.accepted_beta.end());
    out.final_alloc = draws.final_alloc;
    return out;
}

std::vector<std::size_t> thin_indices(std::size_t length, std::size_t gap, std::size_t count,
                                      Rng& rng) {
    if (gap == 0) throw ThinningError("thinning gap must be at least 1");
    if (count == 0) throw ThinningError("thinning count must be at least 1");
    if (count > length || gap > length / count) {
        std::ostringstream os;
        os << "cannot retain " << count << " draws spaced by at least " << gap << " from "
           << length << " draws (need count * gap <= length)";
        throw ThinningError(os.str());
    }
    const std::size_t segment = length / count;
    std::vector<std::size_t> idx(count);
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t lo = j * segment + (j == 0 ? 0 : gap - 1);
        const std::size_t hi = (j + 1) * segment - 1;
        std::uniform_int_distribution<std::size_t> pick(lo, hi);
        idx[j] = pick(rng);
    }
    return idx;
}

Eigen::VectorXd ThinnedSample::column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::out_of_range("no parameter named '" + name + "'");
    return values.col(std::distance(names.begin(), it));
}

Eigen::MatrixXd ThinnedSample::beta() const {
    const auto k = static_cast<Eigen::Index>(names.size()) - 3;
    return values.leftCols(k);
}

ThinnedSample thin(const ChainDraws& post_burn, std::size_t gap, std::size_t count, Rng& rng) {
    const std::vector<std::size_t> idx = thin_indices(post_burn.size(), gap, count, rng);
    const Eigen::MatrixXd all = parameter_matrix(post_burn);
    ThinnedSample out;
    out.names = parameter_names(post_burn.k());
    out.gap = gap;
    out.values.resize(static_cast<Eigen::Index>(count), all.cols());
    for (std::size_t j = 0; j < count; ++j) {
        out.values.row(static_cast<Eigen::Index>(j)) = all.row(static_cast<Eigen::Index>(idx[j]));
        out.source.emplace_back(post_burn.chain_id, post_burn.offset + idx[j]);
    }
    return out;
}

ThinnedSample pool(const std::vector<ThinnedSample>& parts) {
    if (parts.empty()) throw std::invalid_argument("nothing to pool");
    ThinnedSample out;
    out.names = parts.front().names;
    Eigen::Index rows = 0;
    for (const auto& part : parts) {
        if (part.names != out.names) throw std::invalid_argument("pooled samples disagree on columns");
        rows += part.values.rows();
        out.gap = std::max(out.gap, part.gap);
    }
    out.values.resize(rows, static_cast<Eigen::Index>(out.names.size()));
    Eigen::Index at = 0;
    for (const auto& part : parts) {
        out.values.middleRows(at, part.values.rows()) = part.values;
        at += part.values.rows();
        out.source.insert(out.source.end(), part.source.begin(), part.source.end());
    }
    return out;
}

std::size_t auto_gap(const std::vector<ChainDraws>& post_burn, std::size_t max_lag) {
    std::size_t gap = 1;
    for (const auto& chain : post_burn) {
        const Eigen::MatrixXd m = parameter_matrix(chain);
        const std::size_t lag_cap = std::min(max_lag, chain.size() - 1);
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const Eigen::VectorXd col = m.col(c);
            try {
                gap = std::max(gap, dependence_lag(acf({col.data(), chain.size()}, lag_cap)));
            } catch (const DegenerateSeriesError&) {
            }
        }
    }
    return gap;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

std::vector<ParamSummary> summarize(const ThinnedSample& sample) {
    if (sample.size() == 0) throw std::invalid_argument("cannot summarize an empty sample");
    std::vector<ParamSummary> out;
    for (std::size_t c = 0; c < sample.names.size(); ++c) {
        const Eigen::VectorXd col = sample.values.col(static_cast<Eigen::Index>(c));
        std::vector<double> v(col.data(), col.data() + col.size());
        std::sort(v.begin(), v.end());
        out.push_back({sample.names[c], quantile(v, 0.5), col.mean(), quantile(v, 0.025),
                       quantile(v, 0.975), v.front(), v.back()});
    }
    return out;
}

AcceptanceReport acceptance(const ChainDraws& draws) {
    const double n = static_cast<double>(std::max<std::size_t>(draws.size(), 1));
    AcceptanceReport r{draws.chain_id, static_cast<double>(draws.accept_phi()) / n,
                       static_cast<double>(draws.accept_beta()) / n, {}};
    auto check = [&](const char* name, double rate) {
        if (rate <= 0.1 || rate >= 0.7) {
            std::ostringstream os;
            os << "chain " << draws.chain_id << ": " << name << " acceptance rate " << rate
               << " outside (0.1, 0.7)";
            r.warnings.push_back(os.str());
        }
    };
    check("phi", r.phi_rate);
    check("beta", r.beta_rate);
    return r;
}

}  // namespace fbreg
