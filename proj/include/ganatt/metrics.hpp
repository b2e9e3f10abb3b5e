#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ganatt/dataset.hpp"

namespace ganatt {

// 1 - sup_t |F_real(t) - F_synth(t)|, the KS distance evaluated over the
// merged sample points. 1 means the marginals are indistinguishable.
inline double inverted_ks(std::vector<double> real_col, std::vector<double> synth_col) {
    if (real_col.empty() || synth_col.empty()) throw DataError("inverted_ks: empty column");
    std::sort(real_col.begin(), real_col.end());
    std::sort(synth_col.begin(), synth_col.end());
    const double nr = static_cast<double>(real_col.size());
    const double ns = static_cast<double>(synth_col.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < real_col.size() && j < synth_col.size()) {
        const double t = std::min(real_col[i], synth_col[j]);
        while (i < real_col.size() && real_col[i] <= t) ++i;
        while (j < synth_col.size() && synth_col[j] <= t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nr - static_cast<double>(j) / ns));
    }
    // Once one sample is exhausted its ECDF stays put while the other climbs to 1.
    if (i < real_col.size()) d = std::max(d, 1.0 - static_cast<double>(i) / nr);
    if (j < synth_col.size()) d = std::max(d, 1.0 - static_cast<double>(j) / ns);
    return 1.0 - d;
}

inline constexpr double kKlSmoothing = 1e-10;

// KL(synth || real) between shared-range histograms. Empty bins are floored
// at the smoothing epsilon before normalization.
inline double continuous_kl(const std::vector<double>& real_col,
                            const std::vector<double>& synth_col, std::size_t bins = 100,
                            double smoothing = kKlSmoothing) {
    if (real_col.empty() || synth_col.empty()) throw DataError("continuous_kl: empty column");
    if (bins < 2) throw ConfigError("continuous_kl: needs at least 2 bins");
    double lo = real_col[0], hi = real_col[0];
    for (double v : real_col) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : synth_col) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) return 0.0;  // all mass in one point for both samples
    const double width = (hi - lo) / static_cast<double>(bins);
    auto histogram = [&](const std::vector<double>& col) {
        std::vector<double> h(bins, 0.0);
        for (double v : col) {
            auto b = static_cast<std::size_t>((v - lo) / width);
            if (b >= bins) b = bins - 1;
            h[b] += 1.0;
        }
        double total = 0.0;
        for (double& c : h) {
            c /= static_cast<double>(col.size());
            if (c <= 0.0) c = smoothing;
            total += c;
        }
        for (double& c : h) c /= total;
        return h;
    };
    const auto p_real = histogram(real_col);
    const auto p_synth = histogram(synth_col);
    double kl = 0.0;
    for (std::size_t b = 0; b < bins; ++b) kl += p_synth[b] * std::log(p_synth[b] / p_real[b]);
    return std::max(kl, 0.0);
}

// Per-column fidelity of a synthetic dataset against the real one.
struct FidelityReport {
    std::vector<std::string> columns;       // covariates then outcome
    std::vector<double> inverted_ks_cols;
    std::vector<double> kl_cols;
    double inverted_ks_mean = 0.0;
    double kl_mean = 0.0;
    std::size_t n_real = 0;
    std::size_t n_synth = 0;
};

inline FidelityReport fidelity_report(const ObservationalDataset& real,
                                      const ObservationalDataset& synth,
                                      std::size_t kl_bins = 100) {
    if (real.dim() != synth.dim()) throw ShapeError("fidelity: covariate dimensions differ");
    FidelityReport rep;
    rep.n_real = real.size();
    rep.n_synth = synth.size();
    auto column = [](const ObservationalDataset& d, std::size_t j) {
        std::vector<double> col(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) col[i] = d.covariates(i, j);
        return col;
    };
    for (std::size_t j = 0; j <= real.dim(); ++j) {
        const bool outcome = j == real.dim();
        const auto rc = outcome ? real.outcomes : column(real, j);
        const auto sc = outcome ? synth.outcomes : column(synth, j);
        rep.columns.push_back(outcome ? "y" : real.column_names[j]);
        rep.inverted_ks_cols.push_back(inverted_ks(rc, sc));
        rep.kl_cols.push_back(continuous_kl(rc, sc, kl_bins));
    }
    rep.inverted_ks_mean = mean_of(rep.inverted_ks_cols);
    rep.kl_mean = mean_of(rep.kl_cols);
    return rep;
}

}  // namespace ganatt
