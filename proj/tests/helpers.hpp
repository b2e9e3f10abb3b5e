// Test-only oracles, kept independent of the library implementations they
// check.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace testutil {

// Ordinary least squares with standard errors; design rows include whatever
// intercept the caller wants. Plain normal equations, small p only.
struct OlsFit {
    std::vector<double> coef;
    std::vector<double> std_err;
};

inline OlsFit ols(const std::vector<std::vector<double>>& design, const std::vector<double>& y) {
    const std::size_t n = design.size();
    if (n == 0 || y.size() != n) throw std::runtime_error("ols: bad inputs");
    const std::size_t p = design[0].size();
    std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
    std::vector<double> xty(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            xty[j] += design[i][j] * y[i];
            for (std::size_t k = j; k < p; ++k) xtx[j][k] += design[i][j] * design[i][k];
        }
    }
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < j; ++k) xtx[j][k] = xtx[k][j];

    // Gauss-Jordan inverse of X'X.
    std::vector<std::vector<double>> inv(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < p; ++i) inv[i][i] = 1.0;
    auto a = xtx;
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12) throw std::runtime_error("ols: singular design");
        std::swap(a[col], a[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = a[col][col];
        for (std::size_t c = 0; c < p; ++c) {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            for (std::size_t c = 0; c < p; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }

    OlsFit fit;
    fit.coef.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < p; ++k) fit.coef[j] += inv[j][k] * xty[k];

    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double pred = 0.0;
        for (std::size_t j = 0; j < p; ++j) pred += design[i][j] * fit.coef[j];
        rss += (y[i] - pred) * (y[i] - pred);
    }
    const double sigma2 = rss / static_cast<double>(n - p);
    fit.std_err.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) fit.std_err[j] = std::sqrt(sigma2 * inv[j][j]);
    return fit;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace testutil
