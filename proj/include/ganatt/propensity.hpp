#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ganatt/dataset.hpp"
#include "ganatt/network.hpp"

namespace ganatt {

// Logistic regression of treatment on covariates, fit by Newton-Raphson.
struct PropensityModel {
    std::vector<double> coefficients;  // intercept first, then one slope per covariate
    std::vector<double> std_errors;    // same layout, from the observed information
    double log_likelihood = 0.0;
    std::size_t iterations = 0;

    double score(const double* x, std::size_t q) const {
        if (q + 1 != coefficients.size()) throw ShapeError("propensity: covariate dim mismatch");
        double eta = coefficients[0];
        for (std::size_t j = 0; j < q; ++j) eta += coefficients[j + 1] * x[j];
        return sigmoid(eta);
    }

    std::vector<double> scores(const ObservationalDataset& data) const {
        std::vector<double> s(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            s[i] = score(data.covariates.row(i), data.dim());
        return s;
    }
};

namespace detail {

// Solves A x = b in place by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12)
            throw EstimationError("propensity fit: singular information matrix (perfect separation?)");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
    return b;
}

inline std::vector<std::vector<double>> invert_spd(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12)
            throw EstimationError("propensity fit: singular information matrix (perfect separation?)");
        std::swap(a[col], a[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = a[col][col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

}  // namespace detail

inline PropensityModel fit_propensity(const ObservationalDataset& data, std::size_t max_iter = 100,
                                      double tol = 1e-10) {
    data.validate();
    const std::size_t n = data.size();
    const std::size_t q = data.dim();
    if (data.count_group(0) == 0 || data.count_group(1) == 0)
        throw DataError("propensity fit: both treatment groups required");

    // Standardized design stabilizes the Newton steps; coefficients are
    // mapped back to the original scale afterwards.
    std::vector<double> mean(q, 0.0), scale(q, 1.0);
    for (std::size_t j = 0; j < q; ++j) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = data.covariates(i, j);
        mean[j] = mean_of(col);
        const double s = stddev_of(col);
        scale[j] = s > 1e-12 ? s : 1.0;
    }
    auto design = [&](std::size_t i, std::size_t j) {
        return j == 0 ? 1.0 : (data.covariates(i, j - 1) - mean[j - 1]) / scale[j - 1];
    };

    const std::size_t p = q + 1;
    std::vector<double> beta(p, 0.0);
    double prev_ll = -std::numeric_limits<double>::infinity();
    std::size_t iter = 0;
    double ll = 0.0;
    bool converged = false;
    std::vector<double> probs(n);
    while (iter < max_iter) {
        ++iter;
        ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double eta = 0.0;
            for (std::size_t j = 0; j < p; ++j) eta += beta[j] * design(i, j);
            const double pr = sigmoid(eta);
            probs[i] = pr;
            const double pc = std::min(1.0 - 1e-15, std::max(1e-15, pr));
            ll += data.treatment[i] ? std::log(pc) : std::log(1.0 - pc);
        }
        std::vector<double> grad(p, 0.0);
        std::vector<std::vector<double>> hess(p, std::vector<double>(p, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            const double w = probs[i] * (1.0 - probs[i]);
            const double r = static_cast<double>(data.treatment[i]) - probs[i];
            for (std::size_t j = 0; j < p; ++j) {
                const double xj = design(i, j);
                grad[j] += xj * r;
                for (std::size_t k = j; k < p; ++k) hess[j][k] += w * xj * design(i, k);
            }
        }
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k < j; ++k) hess[j][k] = hess[k][j];
        const std::vector<double> step = detail::solve_linear(hess, grad);
        double max_step = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            beta[j] += step[j];
            max_step = std::max(max_step, std::abs(step[j]));
        }
        if (max_step < tol || std::abs(ll - prev_ll) < 1e-13 * (1.0 + std::abs(ll))) {
            converged = true;
            break;
        }
        prev_ll = ll;
    }
    if (!converged) throw EstimationError("propensity fit: no convergence after " +
                                          std::to_string(max_iter) + " iterations");
    // A log-likelihood essentially at zero means the groups are perfectly
    // separated and the MLE does not exist.
    if (ll > -1e-6 * static_cast<double>(n))
        throw EstimationError("propensity fit: perfect separation detected");

    PropensityModel model;
    model.iterations = iter;
    model.log_likelihood = ll;
    // Back to the original covariate scale.
    model.coefficients.assign(p, 0.0);
    model.coefficients[0] = beta[0];
    for (std::size_t j = 1; j < p; ++j) {
        model.coefficients[j] = beta[j] / scale[j - 1];
        model.coefficients[0] -= beta[j] * mean[j - 1] / scale[j - 1];
    }
    // Observed information on the original scale gives the standard errors.
    std::vector<std::vector<double>> info(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        double eta = model.coefficients[0];
        for (std::size_t j = 0; j < q; ++j) eta += model.coefficients[j + 1] * data.covariates(i, j);
        const double pr = sigmoid(eta);
        const double w = pr * (1.0 - pr);
        for (std::size_t j = 0; j < p; ++j) {
            const double xj = j == 0 ? 1.0 : data.covariates(i, j - 1);
            for (std::size_t k = j; k < p; ++k)
                info[j][k] += w * xj * (k == 0 ? 1.0 : data.covariates(i, k - 1));
        }
    }
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < j; ++k) info[j][k] = info[k][j];
    const auto cov = detail::invert_spd(std::move(info));
    model.std_errors.resize(p);
    for (std::size_t j = 0; j < p; ++j) model.std_errors[j] = std::sqrt(std::max(0.0, cov[j][j]));

    for (std::size_t i = 0; i < n; ++i) {
        const double s = model.score(data.covariates.row(i), q);
        if (!(s > 0.0 && s < 1.0))
            throw EstimationError("propensity fit: fitted score outside (0,1)");
    }
    return model;
}

}  // namespace ganatt
