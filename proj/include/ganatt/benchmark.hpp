#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ganatt/dataset.hpp"
#include "ganatt/rng.hpp"

namespace ganatt {

// y = alpha + beta*x + gamma*d + eps, with per-group Gaussian covariates.
// gamma is the treatment effect the estimators are asked to recover.
struct LinearBenchmarkSpec {
    double alpha = 0.0;
    double beta = 1.5;
    double gamma = 1.0;
    double mu0 = 0.0;
    double mu1 = 1.0;
    double sigma_x0 = 1.0;   // standard deviations
    double sigma_x1 = 2.0;
    double sigma_eps = 0.1;
    std::size_t n0 = 50000;
    std::size_t n1 = 50000;
    std::uint64_t seed = 42;

    void validate() const {
        if (sigma_x0 <= 0.0 || sigma_x1 <= 0.0) throw ConfigError("sigma_x must be positive");
        if (sigma_eps < 0.0) throw ConfigError("sigma_eps must be nonnegative");
        if (n0 == 0 || n1 == 0) throw ConfigError("group sizes must be positive");
    }
};

inline ObservationalDataset generate_linear(const LinearBenchmarkSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    ObservationalDataset data;
    data.column_names = {"x1"};
    data.covariates = Matrix(spec.n0 + spec.n1, 1);
    data.outcomes.reserve(spec.n0 + spec.n1);
    data.treatment.reserve(spec.n0 + spec.n1);
    std::size_t r = 0;
    for (int group : {0, 1}) {
        const std::size_t n = group == 0 ? spec.n0 : spec.n1;
        const double mu = group == 0 ? spec.mu0 : spec.mu1;
        const double sx = group == 0 ? spec.sigma_x0 : spec.sigma_x1;
        for (std::size_t i = 0; i < n; ++i, ++r) {
            const double x = rng.normal(mu, sx);
            const double eps = rng.normal(0.0, spec.sigma_eps);
            data.covariates(r, 0) = x;
            data.outcomes.push_back(spec.alpha + spec.beta * x + spec.gamma * group + eps);
            data.treatment.push_back(group);
        }
    }
    return data;
}

// Two-dimensional Gaussian covariates pushed through a sigmoid ramp, with a
// covariate-dependent treatment effect t(x) = gamma * exp(-|x|^2 / (2 sigma)).
struct NonlinearBenchmarkSpec {
    double alpha = 5.0;
    double beta = 5.0;
    double gamma = 1.5;
    double sigma = 4.0;
    std::array<double, 2> w = {0.0, 0.0};
    std::array<double, 4> sigma_mat = {1.0, 0.0, 0.0, 1.0};  // row-major 2x2
    std::array<double, 2> mu0 = {0.0, 0.0};
    std::array<double, 2> mu1 = {0.0, 0.0};
    double sigma_eps = 0.1;
    std::size_t n0 = 100000;
    std::size_t n1 = 100000;
    std::uint64_t seed = 42;

    void validate() const {
        if (sigma <= 0.0) throw ConfigError("sigma must be positive");
        if (sigma_eps < 0.0) throw ConfigError("sigma_eps must be nonnegative");
        if (n0 == 0 || n1 == 0) throw ConfigError("group sizes must be positive");
        if (mu0 == mu1) throw ConfigError("mu0 and mu1 must differ (selection bias)");
    }

    // Draws w, the covariance factor and mu1 uniformly in [-1,1]; mu0 stays 0.
    static NonlinearBenchmarkSpec random_draw(std::uint64_t draw_seed) {
        NonlinearBenchmarkSpec spec;
        Rng rng(draw_seed);
        for (auto& v : spec.w) v = rng.uniform(-1.0, 1.0);
        for (auto& v : spec.sigma_mat) v = rng.uniform(-1.0, 1.0);
        for (auto& v : spec.mu1) v = rng.uniform(-1.0, 1.0);
        spec.seed = draw_seed;
        return spec;
    }
};

namespace detail {

// (1 - exp(-u)) / (1 + exp(-u)), written in the numerically stable form.
inline double sigmoid_ramp(double u) { return std::tanh(0.5 * u); }

inline std::array<double, 2> draw_covariate(Rng& rng, const std::array<double, 2>& mu,
                                            const std::array<double, 4>& sigma_mat) {
    // x = mu + S g gives covariance S S^T.
    const double g0 = rng.normal();
    const double g1 = rng.normal();
    return {mu[0] + sigma_mat[0] * g0 + sigma_mat[1] * g1,
            mu[1] + sigma_mat[2] * g0 + sigma_mat[3] * g1};
}

inline double cate_at(const NonlinearBenchmarkSpec& spec, const std::array<double, 2>& x) {
    const double norm2 = x[0] * x[0] + x[1] * x[1];
    return spec.gamma * std::exp(-norm2 / (2.0 * spec.sigma));
}

}  // namespace detail

inline ObservationalDataset generate_nonlinear(const NonlinearBenchmarkSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    ObservationalDataset data;
    data.column_names = {"x1", "x2"};
    data.covariates = Matrix(spec.n0 + spec.n1, 2);
    data.outcomes.reserve(spec.n0 + spec.n1);
    data.treatment.reserve(spec.n0 + spec.n1);
    std::size_t r = 0;
    for (int group : {0, 1}) {
        const std::size_t n = group == 0 ? spec.n0 : spec.n1;
        const auto& mu = group == 0 ? spec.mu0 : spec.mu1;
        const double scale = group == 0 ? spec.alpha : spec.beta;
        for (std::size_t i = 0; i < n; ++i, ++r) {
            const auto x = detail::draw_covariate(rng, mu, spec.sigma_mat);
            const double u = spec.w[0] * x[0] + spec.w[1] * x[1];
            double y = scale * detail::sigmoid_ramp(u) + rng.normal(0.0, spec.sigma_eps);
            if (group == 1) y += detail::cate_at(spec, x);
            data.covariates(r, 0) = x[0];
            data.covariates(r, 1) = x[1];
            data.outcomes.push_back(y);
            data.treatment.push_back(group);
        }
    }
    return data;
}

struct GroundTruth {
    double att = 0.0;
    double std_err = 0.0;
    std::size_t n_draws = 0;
};

// Monte-Carlo estimate of the process ATT, E[y1 - y0 | treated covariates].
// With alpha == beta this is exactly the mean of t(x) over the treated law.
inline GroundTruth monte_carlo_ground_truth(const NonlinearBenchmarkSpec& spec,
                                            std::size_t n_draws,
                                            std::uint64_t mc_seed = 0xA77ULL) {
    spec.validate();
    if (n_draws < 1000000) throw ConfigError("ground-truth estimation needs at least 1e6 draws");
    Rng rng(mc_seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n_draws; ++i) {
        const auto x = detail::draw_covariate(rng, spec.mu1, spec.sigma_mat);
        const double u = spec.w[0] * x[0] + spec.w[1] * x[1];
        const double effect =
            (spec.beta - spec.alpha) * detail::sigmoid_ramp(u) + detail::cate_at(spec, x);
        sum += effect;
        sum_sq += effect * effect;
    }
    GroundTruth truth;
    truth.n_draws = n_draws;
    const double n = static_cast<double>(n_draws);
    truth.att = sum / n;
    const double var = std::max(0.0, sum_sq / n - truth.att * truth.att);
    truth.std_err = std::sqrt(var / n);
    return truth;
}

// Replicates every row `factor` times in total; the first copy is the
// original, the rest carry independent Gaussian noise on covariates and
// outcome. Treatment flags are preserved.
inline ObservationalDataset augment_with_noise(const ObservationalDataset& data, std::size_t factor,
                                               double noise_sigma, std::uint64_t seed) {
    data.validate();
    if (data.size() == 0) throw DataError("augment: empty dataset");
    if (factor < 1) throw ConfigError("augment: factor must be at least 1");
    if (noise_sigma < 0.0) throw ConfigError("augment: noise sigma must be nonnegative");
    std::vector<double> sigmas(data.dim() + 1, noise_sigma);
    Rng rng(seed);
    ObservationalDataset out;
    out.column_names = data.column_names;
    out.covariates = Matrix(data.size() * factor, data.dim());
    out.outcomes.reserve(data.size() * factor);
    out.treatment.reserve(data.size() * factor);
    std::size_t r = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t c = 0; c < factor; ++c, ++r) {
            for (std::size_t j = 0; j < data.dim(); ++j) {
                double v = data.covariates(i, j);
                if (c > 0) v += rng.normal(0.0, sigmas[j]);
                out.covariates(r, j) = v;
            }
            double y = data.outcomes[i];
            if (c > 0) y += rng.normal(0.0, sigmas[data.dim()]);
            out.outcomes.push_back(y);
            out.treatment.push_back(data.treatment[i]);
        }
    }
    return out;
}

// Same, with per-column sigma = rel_sigma * sample standard deviation.
inline ObservationalDataset augment_with_relative_noise(const ObservationalDataset& data,
                                                        std::size_t factor, double rel_sigma,
                                                        std::uint64_t seed) {
    data.validate();
    if (data.size() == 0) throw DataError("augment: empty dataset");
    if (factor < 1) throw ConfigError("augment: factor must be at least 1");
    if (rel_sigma < 0.0) throw ConfigError("augment: relative sigma must be nonnegative");
    std::vector<double> sigmas;
    for (std::size_t j = 0; j < data.dim(); ++j) {
        std::vector<double> col(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) col[i] = data.covariates(i, j);
        sigmas.push_back(rel_sigma * stddev_of(col));
    }
    sigmas.push_back(rel_sigma * stddev_of(data.outcomes));

    Rng rng(seed);
    ObservationalDataset out;
    out.column_names = data.column_names;
    out.covariates = Matrix(data.size() * factor, data.dim());
    out.outcomes.reserve(data.size() * factor);
    out.treatment.reserve(data.size() * factor);
    std::size_t r = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t c = 0; c < factor; ++c, ++r) {
            for (std::size_t j = 0; j < data.dim(); ++j) {
                double v = data.covariates(i, j);
                if (c > 0) v += rng.normal(0.0, sigmas[j]);
                out.covariates(r, j) = v;
            }
            double y = data.outcomes[i];
            if (c > 0) y += rng.normal(0.0, sigmas[data.dim()]);
            out.outcomes.push_back(y);
            out.treatment.push_back(data.treatment[i]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Flat key-value spec files; realized draws and the recorded ground truth are
// persisted so a generated benchmark can be reproduced exactly.

namespace detail {

inline std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("input not found: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ": line " + std::to_string(ln) + " is not 'key = value'");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

inline double kv_double(const std::map<std::string, std::string>& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("spec file: missing key '" + key + "'");
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw ParseError("spec file: key '" + key + "' is not numeric");
    }
}

inline std::uint64_t kv_u64(const std::map<std::string, std::string>& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("spec file: missing key '" + key + "'");
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw ParseError("spec file: key '" + key + "' is not an integer");
    }
}

}  // namespace detail

inline void save_spec(const LinearBenchmarkSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "kind = linear\n";
    out << "alpha = " << detail::format_double(spec.alpha) << "\n";
    out << "beta = " << detail::format_double(spec.beta) << "\n";
    out << "gamma = " << detail::format_double(spec.gamma) << "\n";
    out << "mu0 = " << detail::format_double(spec.mu0) << "\n";
    out << "mu1 = " << detail::format_double(spec.mu1) << "\n";
    out << "sigma_x0 = " << detail::format_double(spec.sigma_x0) << "\n";
    out << "sigma_x1 = " << detail::format_double(spec.sigma_x1) << "\n";
    out << "sigma_eps = " << detail::format_double(spec.sigma_eps) << "\n";
    out << "n0 = " << spec.n0 << "\n";
    out << "n1 = " << spec.n1 << "\n";
    out << "seed = " << spec.seed << "\n";
    out << "att_truth = " << detail::format_double(spec.gamma) << "\n";
}

inline void save_spec(const NonlinearBenchmarkSpec& spec, const std::string& path,
                      const GroundTruth* truth = nullptr) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "kind = nonlinear\n";
    out << "alpha = " << detail::format_double(spec.alpha) << "\n";
    out << "beta = " << detail::format_double(spec.beta) << "\n";
    out << "gamma = " << detail::format_double(spec.gamma) << "\n";
    out << "sigma = " << detail::format_double(spec.sigma) << "\n";
    out << "w0 = " << detail::format_double(spec.w[0]) << "\n";
    out << "w1 = " << detail::format_double(spec.w[1]) << "\n";
    for (int i = 0; i < 4; ++i)
        out << "sigma_mat" << i / 2 << i % 2 << " = " << detail::format_double(spec.sigma_mat[i])
            << "\n";
    out << "mu0_0 = " << detail::format_double(spec.mu0[0]) << "\n";
    out << "mu0_1 = " << detail::format_double(spec.mu0[1]) << "\n";
    out << "mu1_0 = " << detail::format_double(spec.mu1[0]) << "\n";
    out << "mu1_1 = " << detail::format_double(spec.mu1[1]) << "\n";
    out << "sigma_eps = " << detail::format_double(spec.sigma_eps) << "\n";
    out << "n0 = " << spec.n0 << "\n";
    out << "n1 = " << spec.n1 << "\n";
    out << "seed = " << spec.seed << "\n";
    if (truth) {
        out << "att_truth = " << detail::format_double(truth->att) << "\n";
        out << "att_truth_std_err = " << detail::format_double(truth->std_err) << "\n";
        out << "att_truth_draws = " << truth->n_draws << "\n";
    }
}

inline std::string spec_kind(const std::string& path) {
    const auto kv = detail::read_kv_file(path);
    const auto it = kv.find("kind");
    if (it == kv.end()) throw ParseError(path + ": missing key 'kind'");
    return it->second;
}

inline LinearBenchmarkSpec load_linear_spec(const std::string& path) {
    const auto kv = detail::read_kv_file(path);
    LinearBenchmarkSpec spec;
    spec.alpha = detail::kv_double(kv, "alpha");
    spec.beta = detail::kv_double(kv, "beta");
    spec.gamma = detail::kv_double(kv, "gamma");
    spec.mu0 = detail::kv_double(kv, "mu0");
    spec.mu1 = detail::kv_double(kv, "mu1");
    spec.sigma_x0 = detail::kv_double(kv, "sigma_x0");
    spec.sigma_x1 = detail::kv_double(kv, "sigma_x1");
    spec.sigma_eps = detail::kv_double(kv, "sigma_eps");
    spec.n0 = detail::kv_u64(kv, "n0");
    spec.n1 = detail::kv_u64(kv, "n1");
    spec.seed = detail::kv_u64(kv, "seed");
    return spec;
}

inline NonlinearBenchmarkSpec load_nonlinear_spec(const std::string& path,
                                                  GroundTruth* truth_out = nullptr) {
    const auto kv = detail::read_kv_file(path);
    NonlinearBenchmarkSpec spec;
    spec.alpha = detail::kv_double(kv, "alpha");
    spec.beta = detail::kv_double(kv, "beta");
    spec.gamma = detail::kv_double(kv, "gamma");
    spec.sigma = detail::kv_double(kv, "sigma");
    spec.w = {detail::kv_double(kv, "w0"), detail::kv_double(kv, "w1")};
    spec.sigma_mat = {detail::kv_double(kv, "sigma_mat00"), detail::kv_double(kv, "sigma_mat01"),
                      detail::kv_double(kv, "sigma_mat10"), detail::kv_double(kv, "sigma_mat11")};
    spec.mu0 = {detail::kv_double(kv, "mu0_0"), detail::kv_double(kv, "mu0_1")};
    spec.mu1 = {detail::kv_double(kv, "mu1_0"), detail::kv_double(kv, "mu1_1")};
    spec.sigma_eps = detail::kv_double(kv, "sigma_eps");
    spec.n0 = detail::kv_u64(kv, "n0");
    spec.n1 = detail::kv_u64(kv, "n1");
    spec.seed = detail::kv_u64(kv, "seed");
    if (truth_out && kv.count("att_truth")) {
        truth_out->att = detail::kv_double(kv, "att_truth");
        truth_out->std_err = detail::kv_double(kv, "att_truth_std_err");
        truth_out->n_draws = detail::kv_u64(kv, "att_truth_draws");
    }
    return spec;
}

}  // namespace ganatt
