#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ganatt/att.hpp"
#include "ganatt/cate.hpp"
#include "ganatt/dataset.hpp"

namespace ganatt {

enum class Matcher { NearestNeighbor, Kernel, Cem };

struct MatchedTreated {
    std::size_t treated_index = 0;                       // row index into the dataset
    std::vector<std::pair<std::size_t, double>> controls;  // (row index, weight), weights sum to 1
};

struct MatchResult {
    Matcher tag = Matcher::NearestNeighbor;
    std::vector<MatchedTreated> matches;
    std::vector<std::size_t> unmatched_treated;
    std::size_t controls_used = 0;  // distinct controls carrying weight

    std::size_t treated_matched() const { return matches.size(); }
};

namespace detail {

inline std::vector<std::size_t> group_rows(const ObservationalDataset& data, int group) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data.treatment[i] == group) rows.push_back(i);
    return rows;
}

inline std::size_t distinct_controls(const MatchResult& result) {
    std::set<std::size_t> used;
    for (const auto& m : result.matches)
        for (const auto& [idx, w] : m.controls)
            if (w > 0.0) used.insert(idx);
    return used.size();
}

}  // namespace detail

// 1:k nearest-neighbor matching on the propensity score, with replacement.
// Distance ties prefer the lowest control row index; a caliper (when given)
// excludes controls beyond that score distance.
inline MatchResult match_nn(const std::vector<double>& scores, const ObservationalDataset& data,
                            std::size_t k, std::optional<double> caliper = std::nullopt) {
    data.validate();
    if (scores.size() != data.size()) throw ShapeError("match_nn: scores do not align with data");
    if (k < 1) throw ConfigError("match_nn: k must be at least 1");
    if (caliper && *caliper <= 0.0) throw ConfigError("match_nn: caliper must be positive");
    const auto controls = detail::group_rows(data, 0);
    const auto treated = detail::group_rows(data, 1);
    if (controls.empty()) throw EstimationError("match_nn: empty control group");

    MatchResult result;
    result.tag = Matcher::NearestNeighbor;
    std::vector<std::pair<double, std::size_t>> dist(controls.size());
    for (std::size_t t : treated) {
        const double st = scores[t];
        for (std::size_t c = 0; c < controls.size(); ++c)
            dist[c] = {std::abs(scores[controls[c]] - st), controls[c]};
        const std::size_t want = std::min(k, dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(want),
                          dist.end());
        MatchedTreated m;
        m.treated_index = t;
        for (std::size_t c = 0; c < want; ++c) {
            if (caliper && dist[c].first > *caliper) break;
            m.controls.emplace_back(dist[c].second, 0.0);
        }
        if (m.controls.empty()) {
            result.unmatched_treated.push_back(t);
            continue;
        }
        const double w = 1.0 / static_cast<double>(m.controls.size());
        for (auto& [idx, weight] : m.controls) weight = w;
        result.matches.push_back(std::move(m));
    }
    result.controls_used = detail::distinct_controls(result);
    return result;
}

inline double epanechnikov(double u) {
    return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

// Rule-of-thumb bandwidth over the control-group scores.
inline double silverman_bandwidth(const std::vector<double>& scores,
                                  const ObservationalDataset& data) {
    std::vector<double> s;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data.treatment[i] == 0) s.push_back(scores[i]);
    if (s.empty()) throw EstimationError("bandwidth: empty control group");
    std::sort(s.begin(), s.end());
    const double sd = stddev_of(s);
    const double iqr = s[(s.size() * 3) / 4] - s[s.size() / 4];
    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    const double h =
        0.9 * spread * std::pow(static_cast<double>(s.size()), -0.2);
    return h > 0.0 ? h : 1e-6;
}

// Epanechnikov-kernel weighting of every control by propensity distance.
// Treated rows whose kernel weights all vanish are left unmatched.
inline MatchResult match_kernel(const std::vector<double>& scores,
                                const ObservationalDataset& data, double bandwidth) {
    data.validate();
    if (scores.size() != data.size()) throw ShapeError("match_kernel: scores do not align with data");
    if (!(bandwidth > 0.0)) throw ConfigError("match_kernel: bandwidth must be positive");
    const auto controls = detail::group_rows(data, 0);
    const auto treated = detail::group_rows(data, 1);
    if (controls.empty()) throw EstimationError("match_kernel: empty control group");

    MatchResult result;
    result.tag = Matcher::Kernel;
    for (std::size_t t : treated) {
        const double st = scores[t];
        MatchedTreated m;
        m.treated_index = t;
        double total = 0.0;
        for (std::size_t c : controls) {
            const double w = epanechnikov((scores[c] - st) / bandwidth);
            if (w > 0.0) {
                m.controls.emplace_back(c, w);
                total += w;
            }
        }
        if (m.controls.empty() || total <= 0.0) {
            result.unmatched_treated.push_back(t);
            continue;
        }
        for (auto& [idx, w] : m.controls) w /= total;
        result.matches.push_back(std::move(m));
    }
    result.controls_used = detail::distinct_controls(result);
    return result;
}

inline std::size_t sturges_bins(std::size_t n) {
    return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 2)))) ) + 1;
}

// Coarsening grid shared by every stratum: covers the pooled covariates,
// slightly widened, with Sturges bin counts unless overridden.
inline CubeGrid cem_grid(const ObservationalDataset& data,
                         const std::vector<std::size_t>& bins_per_dim) {
    data.validate();
    const std::size_t q = data.dim();
    std::vector<std::size_t> bins = bins_per_dim;
    if (bins.empty()) bins.assign(q, sturges_bins(data.size()));
    if (bins.size() != q) throw ShapeError("match_cem: bins_per_dim length mismatch");

    std::vector<double> lo(q, std::numeric_limits<double>::infinity());
    std::vector<double> hi(q, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t j = 0; j < q; ++j) {
            lo[j] = std::min(lo[j], data.covariates(i, j));
            hi[j] = std::max(hi[j], data.covariates(i, j));
        }
    for (std::size_t j = 0; j < q; ++j) {
        double span = hi[j] - lo[j];
        if (span <= 0.0) span = std::max(1e-9, std::abs(lo[j]) * 1e-9);
        lo[j] -= 0.005 * span;
        hi[j] += 0.005 * span;
    }
    return CubeGrid(lo, hi, bins);
}

// Coarsened exact matching on the shared cube grid: strata holding both
// groups match each treated row to the stratum's controls with equal
// weights; single-group strata are dropped entirely.
inline MatchResult match_cem(const ObservationalDataset& data,
                             const std::vector<std::size_t>& bins_per_dim) {
    const CubeGrid grid = cem_grid(data, bins_per_dim);

    std::map<std::uint64_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> strata;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto key = grid.locate(data.covariates.row(i));
        if (!key) continue;  // cannot happen: bounds cover the data
        auto& [ctrl, treat] = strata[*key];
        (data.treatment[i] == 1 ? treat : ctrl).push_back(i);
    }

    MatchResult result;
    result.tag = Matcher::Cem;
    for (const auto& [key, members] : strata) {
        const auto& [ctrl, treat] = members;
        if (ctrl.empty() || treat.empty()) {
            for (std::size_t t : treat) result.unmatched_treated.push_back(t);
            continue;
        }
        const double w = 1.0 / static_cast<double>(ctrl.size());
        for (std::size_t t : treat) {
            MatchedTreated m;
            m.treated_index = t;
            for (std::size_t c : ctrl) m.controls.emplace_back(c, w);
            result.matches.push_back(std::move(m));
        }
    }
    std::sort(result.matches.begin(), result.matches.end(),
              [](const MatchedTreated& a, const MatchedTreated& b) {
                  return a.treated_index < b.treated_index;
              });
    std::sort(result.unmatched_treated.begin(), result.unmatched_treated.end());
    if (result.matches.empty())
        throw EstimationError("match_cem: no stratum contains both treatment groups");
    result.controls_used = detail::distinct_controls(result);
    return result;
}

// Mean of (treated outcome - weighted matched control outcome) over the
// matched treated rows.
inline AttEstimate att_from_matches(const MatchResult& result, const ObservationalDataset& data) {
    data.validate();
    if (result.matches.empty()) throw EstimationError("att_from_matches: no matched treated samples");
    AttEstimate est;
    est.per_sample_cates.reserve(result.matches.size());
    double sum = 0.0;
    for (const auto& m : result.matches) {
        double counterfactual = 0.0;
        for (const auto& [idx, w] : m.controls) counterfactual += w * data.outcomes[idx];
        const double diff = data.outcomes[m.treated_index] - counterfactual;
        est.per_sample_cates.push_back(diff);
        sum += diff;
    }
    est.n_used = result.matches.size();
    est.n_dropped = result.unmatched_treated.size();
    est.att = sum / static_cast<double>(est.n_used);
    if (est.n_used > 1) {
        double ss = 0.0;
        for (double v : est.per_sample_cates) ss += (v - est.att) * (v - est.att);
        est.std_err = std::sqrt(ss / static_cast<double>(est.n_used - 1)) /
                      std::sqrt(static_cast<double>(est.n_used));
    }
    return est;
}

// Audit trail: one CSV row per (treated, control, weight) pair.
inline void export_match_csv(const MatchResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "treated_index,control_index,weight\n";
    for (const auto& m : result.matches)
        for (const auto& [idx, w] : m.controls)
            out << m.treated_index << "," << idx << "," << detail::format_double(w) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace ganatt
