#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ganatt/matrix.hpp"

namespace ganatt {

// Bias-corrected Adam over an ordered list of parameter matrices.
struct AdamState {
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double epsilon = 1e-8;
    std::uint64_t step_count = 0;
    std::vector<Matrix> first_moment;
    std::vector<Matrix> second_moment;

    AdamState() = default;
    AdamState(double lr, double b1, double b2, double eps = 1e-8)
        : learning_rate(lr), beta1(b1), beta2(b2), epsilon(eps) {
        if (!(b1 > 0.0 && b1 < 1.0) || !(b2 > 0.0 && b2 < 1.0))
            throw ConfigError("adam betas must lie in (0,1)");
        if (lr <= 0.0) throw ConfigError("adam learning rate must be positive");
    }

    template <typename ParamList>
    void ensure_shapes(const ParamList& params) {
        if (first_moment.size() == params.size()) {
            for (std::size_t i = 0; i < params.size(); ++i)
                if (!first_moment[i].same_shape(*params[i]))
                    throw ShapeError("adam moment accumulators do not match parameters");
            return;
        }
        if (!first_moment.empty())
            throw ShapeError("adam state initialized for a different parameter list");
        first_moment.reserve(params.size());
        second_moment.reserve(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            first_moment.emplace_back(params[i]->rows(), params[i]->cols());
            second_moment.emplace_back(params[i]->rows(), params[i]->cols());
        }
    }
};

inline void adam_step(AdamState& state, const std::vector<Matrix*>& params,
                      const std::vector<const Matrix*>& grads) {
    if (params.size() != grads.size())
        throw ShapeError("adam_step: parameter and gradient counts differ");
    state.ensure_shapes(params);
    for (std::size_t i = 0; i < params.size(); ++i)
        if (!params[i]->same_shape(*grads[i]))
            throw ShapeError("adam_step: gradient shape mismatch");

    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double* p = params[i]->data();
        const double* g = grads[i]->data();
        double* m = state.first_moment[i].data();
        double* v = state.second_moment[i].data();
        const std::size_t n = params[i]->size();
        for (std::size_t k = 0; k < n; ++k) {
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            p[k] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

}  // namespace ganatt
