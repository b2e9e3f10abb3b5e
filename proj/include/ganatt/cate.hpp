#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ganatt/dataset.hpp"

namespace ganatt {

struct GridConfig {
    // 0 means auto: ceil(N_pooled^(1/(q+2))), capped at 64, per dimension.
    std::vector<std::size_t> bins_per_dim;
    // Bounds cover the pooled data, widened by this fraction of the span.
    double bounds_expand = 0.01;
    std::size_t min_count = 5;
    // Explicit bounds override the data-driven policy; points outside land
    // in the overflow tally.
    std::vector<double> lower_bounds;
    std::vector<double> upper_bounds;
};

inline std::size_t auto_bins(std::size_t n_pooled, std::size_t q) {
    const double b = std::ceil(std::pow(static_cast<double>(n_pooled),
                                        1.0 / (static_cast<double>(q) + 2.0)));
    return std::min<std::size_t>(64, std::max<std::size_t>(1, static_cast<std::size_t>(b)));
}

// Equal-sized axis-aligned binning of covariate space with per-cube outcome
// accumulators for each group. Cubes are stored sparsely.
class CubeGrid {
public:
    struct CellStats {
        std::size_t count0 = 0;
        std::size_t count1 = 0;
        double sum0 = 0.0;
        double sum1 = 0.0;
    };

    CubeGrid() = default;
    CubeGrid(std::vector<double> lower, std::vector<double> upper, std::vector<std::size_t> bins)
        : lower_(std::move(lower)), upper_(std::move(upper)), bins_(std::move(bins)) {
        if (lower_.size() != upper_.size() || lower_.size() != bins_.size())
            throw ShapeError("grid: bounds and bin vectors differ in length");
        if (lower_.empty()) throw ConfigError("grid: needs at least one dimension");
        width_.resize(dim());
        stride_.resize(dim());
        std::uint64_t stride = 1;
        for (std::size_t j = 0; j < dim(); ++j) {
            if (!(std::isfinite(lower_[j]) && std::isfinite(upper_[j])))
                throw ConfigError("grid: bounds must be finite");
            if (!(lower_[j] < upper_[j])) throw ConfigError("grid: lower bound must be below upper");
            if (bins_[j] < 1) throw ConfigError("grid: bin counts must be at least 1");
            width_[j] = (upper_[j] - lower_[j]) / static_cast<double>(bins_[j]);
            stride_[j] = stride;
            if (bins_[j] != 0 && stride > UINT64_MAX / bins_[j])
                throw ConfigError("grid: too many cubes to index");
            stride *= bins_[j];
        }
    }

    std::size_t dim() const { return lower_.size(); }
    const std::vector<std::size_t>& bins() const { return bins_; }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }

    // Linear cube index for an in-bounds point; nullopt when out of bounds
    // (NaN never lands in a cube).
    std::optional<std::uint64_t> locate(const double* x) const {
        std::uint64_t key = 0;
        for (std::size_t j = 0; j < dim(); ++j) {
            const double v = x[j];
            if (!(v >= lower_[j] && v <= upper_[j])) return std::nullopt;
            auto b = static_cast<std::uint64_t>((v - lower_[j]) / width_[j]);
            if (b >= bins_[j]) b = bins_[j] - 1;  // the upper edge is inclusive
            key += b * stride_[j];
        }
        return key;
    }

    void insert(const double* x, double outcome, int group) {
        const auto key = locate(x);
        if (!key) {
            (group == 1 ? overflow1_ : overflow0_) += 1;
            return;
        }
        CellStats& cell = cells_[*key];
        if (group == 1) {
            cell.count1 += 1;
            cell.sum1 += outcome;
        } else {
            cell.count0 += 1;
            cell.sum0 += outcome;
        }
    }

    std::vector<std::size_t> unpack(std::uint64_t key) const {
        std::vector<std::size_t> idx(dim());
        for (std::size_t j = 0; j < dim(); ++j) idx[j] = (key / stride_[j]) % bins_[j];
        return idx;
    }

    std::vector<double> cube_center(std::uint64_t key) const {
        const auto idx = unpack(key);
        std::vector<double> center(dim());
        for (std::size_t j = 0; j < dim(); ++j)
            center[j] = lower_[j] + (static_cast<double>(idx[j]) + 0.5) * width_[j];
        return center;
    }

    const std::map<std::uint64_t, CellStats>& cells() const { return cells_; }
    std::size_t overflow(int group) const { return group == 1 ? overflow1_ : overflow0_; }

private:
    std::vector<double> lower_, upper_, width_;
    std::vector<std::size_t> bins_;
    std::vector<std::uint64_t> stride_;
    std::map<std::uint64_t, CellStats> cells_;
    std::size_t overflow0_ = 0;
    std::size_t overflow1_ = 0;
};

// Piecewise-constant CATE surface: mean1(cube) - mean0(cube) wherever both
// groups clear the min_count support threshold.
class CateFunction {
public:
    CateFunction() = default;
    CateFunction(CubeGrid grid, std::size_t min_count)
        : grid_(std::move(grid)), min_count_(min_count) {}

    const CubeGrid& grid() const { return grid_; }
    std::size_t min_count() const { return min_count_; }

    std::optional<double> evaluate(const double* x, std::size_t dim) const {
        if (dim != grid_.dim()) throw ShapeError("cate: covariate dimension does not match grid");
        const auto key = grid_.locate(x);
        if (!key) return std::nullopt;
        const auto it = grid_.cells().find(*key);
        if (it == grid_.cells().end()) return std::nullopt;
        const auto& cell = it->second;
        if (cell.count0 < min_count_ || cell.count1 < min_count_) return std::nullopt;
        return cell.sum1 / static_cast<double>(cell.count1) -
               cell.sum0 / static_cast<double>(cell.count0);
    }

    std::optional<double> evaluate(const std::vector<double>& x) const {
        return evaluate(x.data(), x.size());
    }

    std::size_t supported_cubes() const {
        std::size_t n = 0;
        for (const auto& [key, cell] : grid_.cells())
            if (cell.count0 >= min_count_ && cell.count1 >= min_count_) ++n;
        return n;
    }

private:
    CubeGrid grid_;
    std::size_t min_count_ = 5;
};

// Accumulates two synthetic group samples onto a shared grid. Bounds cover
// the pooled covariates of both inputs.
inline CateFunction build_grid(const ObservationalDataset& synthetic0,
                               const ObservationalDataset& synthetic1, const GridConfig& config) {
    synthetic0.validate();
    synthetic1.validate();
    const std::size_t q = synthetic0.dim();
    if (synthetic1.dim() != q) throw ShapeError("build_grid: covariate dimensions differ");
    if (!config.bins_per_dim.empty() && config.bins_per_dim.size() != q)
        throw ShapeError("build_grid: bins_per_dim length does not match covariate dimension");

    const std::size_t n_pooled = synthetic0.size() + synthetic1.size();
    std::vector<std::size_t> bins = config.bins_per_dim;
    if (bins.empty()) bins.assign(q, auto_bins(n_pooled, q));

    if (n_pooled == 0) throw DataError("build_grid: both inputs are empty");
    std::vector<double> lo(q, std::numeric_limits<double>::infinity());
    std::vector<double> hi(q, -std::numeric_limits<double>::infinity());
    if (!config.lower_bounds.empty() || !config.upper_bounds.empty()) {
        if (config.lower_bounds.size() != q || config.upper_bounds.size() != q)
            throw ShapeError("build_grid: explicit bounds length does not match dimension");
        lo = config.lower_bounds;
        hi = config.upper_bounds;
    } else {
        for (const ObservationalDataset* d : {&synthetic0, &synthetic1}) {
            for (std::size_t i = 0; i < d->size(); ++i) {
                for (std::size_t j = 0; j < q; ++j) {
                    lo[j] = std::min(lo[j], d->covariates(i, j));
                    hi[j] = std::max(hi[j], d->covariates(i, j));
                }
            }
        }
        for (std::size_t j = 0; j < q; ++j) {
            double span = hi[j] - lo[j];
            if (span <= 0.0) span = std::max(1e-9, std::abs(lo[j]) * 1e-9);
            lo[j] -= 0.5 * config.bounds_expand * span;
            hi[j] += 0.5 * config.bounds_expand * span;
        }
    }

    CubeGrid grid(std::move(lo), std::move(hi), std::move(bins));
    for (std::size_t i = 0; i < synthetic0.size(); ++i)
        grid.insert(synthetic0.covariates.row(i), synthetic0.outcomes[i], 0);
    for (std::size_t i = 0; i < synthetic1.size(); ++i)
        grid.insert(synthetic1.covariates.row(i), synthetic1.outcomes[i], 1);
    return CateFunction(std::move(grid), config.min_count);
}

// Writes one CSV row per supported cube: bin indices, cube centers, per-group
// counts and means, and the cube's CATE value.
inline void export_cate_surface(const CateFunction& cate, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    const std::size_t q = cate.grid().dim();
    for (std::size_t j = 0; j < q; ++j) out << "bin_" << j << ",";
    for (std::size_t j = 0; j < q; ++j) out << "center_" << j << ",";
    out << "count0,count1,mean0,mean1,dy\n";
    for (const auto& [key, cell] : cate.grid().cells()) {
        if (cell.count0 < cate.min_count() || cell.count1 < cate.min_count()) continue;
        const auto idx = cate.grid().unpack(key);
        const auto center = cate.grid().cube_center(key);
        for (std::size_t j = 0; j < q; ++j) out << idx[j] << ",";
        for (std::size_t j = 0; j < q; ++j) out << detail::format_double(center[j]) << ",";
        const double mean0 = cell.sum0 / static_cast<double>(cell.count0);
        const double mean1 = cell.sum1 / static_cast<double>(cell.count1);
        out << cell.count0 << "," << cell.count1 << "," << detail::format_double(mean0) << ","
            << detail::format_double(mean1) << "," << detail::format_double(mean1 - mean0) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace ganatt
