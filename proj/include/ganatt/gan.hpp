#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "ganatt/adam.hpp"
#include "ganatt/dataset.hpp"
#include "ganatt/metrics.hpp"
#include "ganatt/network.hpp"
#include "ganatt/rng.hpp"

namespace ganatt {

// Treated rows are conditioned as '10', control rows as '01'.
inline void write_onehot(double* out2, int group) {
    out2[0] = group == 1 ? 1.0 : 0.0;
    out2[1] = group == 0 ? 1.0 : 0.0;
}

// ---------------------------------------------------------------------------
// Column codec: the generator works on an encoded row layout where discrete
// columns (few distinct values) become one-hot blocks hardened by argmax at
// generation time, and continuous columns pass through unchanged.

struct ColumnEncoding {
    bool discrete = false;
    std::vector<double> levels;  // sorted distinct values, discrete columns only

    std::size_t width() const { return discrete ? levels.size() : 1; }
};

struct DataCodec {
    std::vector<ColumnEncoding> columns;  // q covariates, then the outcome

    std::size_t logical_dim() const { return columns.size(); }
    std::size_t encoded_dim() const {
        std::size_t w = 0;
        for (const auto& c : columns) w += c.width();
        return w;
    }
};

namespace gan_detail {

inline std::vector<double> logical_column(const ObservationalDataset& data, std::size_t col) {
    std::vector<double> v(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        v[i] = col < data.dim() ? data.covariates(i, col) : data.outcomes[i];
    return v;
}

inline DataCodec build_codec(const ObservationalDataset& data, std::size_t discrete_max_levels) {
    DataCodec codec;
    for (std::size_t col = 0; col <= data.dim(); ++col) {
        std::vector<double> values = logical_column(data, col);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        ColumnEncoding enc;
        if (discrete_max_levels > 0 && values.size() <= discrete_max_levels) {
            enc.discrete = true;
            enc.levels = std::move(values);
        }
        codec.columns.push_back(std::move(enc));
    }
    return codec;
}

inline Matrix encode(const DataCodec& codec, const ObservationalDataset& data) {
    Matrix out(data.size(), codec.encoded_dim());
    for (std::size_t i = 0; i < data.size(); ++i) {
        double* row = out.row(i);
        std::size_t at = 0;
        for (std::size_t col = 0; col < codec.logical_dim(); ++col) {
            const double v = col < data.dim() ? data.covariates(i, col) : data.outcomes[i];
            const auto& enc = codec.columns[col];
            if (!enc.discrete) {
                row[at++] = v;
                continue;
            }
            // Nearest level; training values always match one exactly.
            std::size_t best = 0;
            double best_d = std::abs(v - enc.levels[0]);
            for (std::size_t l = 1; l < enc.levels.size(); ++l) {
                const double d = std::abs(v - enc.levels[l]);
                if (d < best_d) {
                    best_d = d;
                    best = l;
                }
            }
            for (std::size_t l = 0; l < enc.levels.size(); ++l) row[at++] = l == best ? 1.0 : 0.0;
        }
    }
    return out;
}

inline void decode_row(const DataCodec& codec, const double* encoded, double* logical_out) {
    std::size_t at = 0;
    for (std::size_t col = 0; col < codec.logical_dim(); ++col) {
        const auto& enc = codec.columns[col];
        if (!enc.discrete) {
            logical_out[col] = encoded[at++];
            continue;
        }
        std::size_t best = 0;
        for (std::size_t l = 1; l < enc.levels.size(); ++l)
            if (encoded[at + l] > encoded[at + best]) best = l;
        logical_out[col] = enc.levels[best];
        at += enc.levels.size();
    }
}

}  // namespace gan_detail

// ---------------------------------------------------------------------------

struct TrainConfig {
    std::size_t epochs = 150;
    std::size_t batch_size = 256;
    std::size_t noise_dim = 16;
    std::vector<std::size_t> gen_hidden = {128, 128};
    std::vector<std::size_t> disc_hidden = {128, 128};
    double gen_lr = 2e-4;
    double disc_lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    std::size_t disc_steps = 1;            // discriminator updates per generator update
    std::uint64_t seed = 42;
    std::size_t snapshot_interval = 10;    // epochs between fidelity snapshots
    std::size_t snapshot_sample = 4096;
    double early_stop_distance = 0.0;      // stop once a snapshot beats this; 0 disables
    std::size_t discrete_max_levels = 16;  // 0 treats every column as continuous

    void validate(std::size_t n_rows) const {
        if (batch_size == 0 || noise_dim == 0) throw ConfigError("train: counts must be positive");
        if (batch_size > n_rows) throw ConfigError("train: batch_size exceeds dataset size");
        if (gen_hidden.empty() || disc_hidden.empty())
            throw ConfigError("train: networks need at least one hidden layer");
        for (std::size_t w : gen_hidden)
            if (w == 0) throw ConfigError("train: layer widths must be positive");
        for (std::size_t w : disc_hidden)
            if (w == 0) throw ConfigError("train: layer widths must be positive");
        if (disc_steps == 0) throw ConfigError("train: disc_steps must be positive");
        if (snapshot_interval == 0) throw ConfigError("train: snapshot_interval must be positive");
        if (snapshot_sample == 0) throw ConfigError("train: snapshot_sample must be positive");
    }
};

// Generator/discriminator pair with everything needed to synthesize rows on
// the original data scale.
struct GanModel {
    FeedforwardNet generator;
    FeedforwardNet discriminator;
    std::size_t noise_dim = 0;
    DataCodec codec;
    std::vector<double> col_mean;  // per encoded column
    std::vector<double> col_std;
    std::vector<std::string> column_names;  // covariate labels
    std::uint64_t training_seed = 0;

    std::size_t covariate_dim() const { return column_names.size(); }
    std::size_t encoded_dim() const { return codec.encoded_dim(); }

    void validate() const {
        if (generator.input_dim() != noise_dim + 2)
            throw ShapeError("model: generator input must be noise_dim + 2");
        if (generator.output_dim() != encoded_dim())
            throw ShapeError("model: generator output does not match data width");
        if (discriminator.input_dim() != encoded_dim() + 2)
            throw ShapeError("model: discriminator input does not match data width");
        if (discriminator.output_dim() != 1 ||
            discriminator.output_activation != OutputActivation::Sigmoid)
            throw ShapeError("model: discriminator must end in a single sigmoid unit");
        if (col_mean.size() != encoded_dim() || col_std.size() != encoded_dim())
            throw ShapeError("model: normalization stats do not match data width");
        for (double s : col_std)
            if (!(s > 0.0)) throw DataError("model: normalization std must be positive");
        if (codec.logical_dim() != covariate_dim() + 1)
            throw ShapeError("model: codec does not match column names");
    }
};

struct TrainingLog {
    std::vector<double> disc_loss;  // per epoch
    std::vector<double> gen_loss;
    struct Snapshot {
        std::size_t epoch = 0;
        double moment_distance = 0.0;
        double inverted_ks_mean = 0.0;
    };
    std::vector<Snapshot> snapshots;
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    double best_distance = 0.0;
    bool early_stopped = false;

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot open for writing: " + path);
        out << "epoch,disc_loss,gen_loss\n";
        for (std::size_t e = 0; e < disc_loss.size(); ++e)
            out << e + 1 << "," << detail::format_double(disc_loss[e]) << ","
                << detail::format_double(gen_loss[e]) << "\n";
    }
};

struct TrainResult {
    GanModel model;
    TrainingLog log;
};

namespace gan_detail {

inline constexpr double kProbFloor = 1e-12;

inline double clamp_prob(double p) {
    return std::min(1.0 - kProbFloor, std::max(kProbFloor, p));
}

inline Matrix vstack(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ShapeError("vstack: column counts differ");
    Matrix out(a.rows() + b.rows(), a.cols());
    std::memcpy(out.data(), a.data(), a.size() * sizeof(double));
    std::memcpy(out.data() + a.size(), b.data(), b.size() * sizeof(double));
    return out;
}

inline Matrix hstack(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeError("hstack: row counts differ");
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        std::memcpy(out.row(i), a.row(i), a.cols() * sizeof(double));
        std::memcpy(out.row(i) + a.cols(), b.row(i), b.cols() * sizeof(double));
    }
    return out;
}

inline double discriminator_loss(const FeedforwardNet& disc, const Matrix& real_in,
                                 const Matrix& fake_in) {
    const Matrix scores = forward(disc, vstack(real_in, fake_in));
    double loss = 0.0;
    for (std::size_t i = 0; i < real_in.rows(); ++i)
        loss -= std::log(clamp_prob(scores(i, 0))) / static_cast<double>(real_in.rows());
    for (std::size_t i = 0; i < fake_in.rows(); ++i)
        loss -= std::log(1.0 - clamp_prob(scores(real_in.rows() + i, 0))) /
                static_cast<double>(fake_in.rows());
    return loss;
}

// One log-loss ascent step on real-vs-fake batches; returns the pre-step loss.
inline double discriminator_step(FeedforwardNet& disc, AdamState& adam, const Matrix& real_in,
                                 const Matrix& fake_in) {
    const Matrix combined = vstack(real_in, fake_in);
    const ForwardTrace trace = forward_trace(disc, combined);
    const Matrix& scores = trace.output();
    const double n_real = static_cast<double>(real_in.rows());
    const double n_fake = static_cast<double>(fake_in.rows());
    double loss = 0.0;
    Matrix upstream(combined.rows(), 1);
    for (std::size_t i = 0; i < combined.rows(); ++i) {
        const double p = clamp_prob(scores(i, 0));
        if (i < real_in.rows()) {
            loss -= std::log(p) / n_real;
            upstream(i, 0) = -1.0 / (p * n_real);
        } else {
            loss -= std::log(1.0 - p) / n_fake;
            upstream(i, 0) = 1.0 / ((1.0 - p) * n_fake);
        }
    }
    const NetGradients grads = backward(disc, trace, upstream);
    adam_step(adam, disc.parameters(), grads.parameters());
    return loss;
}

// Non-saturating generator update: ascend log D(fake). Only the generator's
// parameters move; the discriminator supplies input gradients.
inline double generator_step(FeedforwardNet& gen, const FeedforwardNet& disc, AdamState& adam,
                             const Matrix& gen_in, const Matrix& cond) {
    const ForwardTrace gen_trace = forward_trace(gen, gen_in);
    const Matrix disc_in = hstack(gen_trace.output(), cond);
    const ForwardTrace disc_trace = forward_trace(disc, disc_in);
    const Matrix& scores = disc_trace.output();
    const double n = static_cast<double>(gen_in.rows());
    double loss = 0.0;
    Matrix upstream(scores.rows(), 1);
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        const double p = clamp_prob(scores(i, 0));
        loss -= std::log(p) / n;
        upstream(i, 0) = -1.0 / (p * n);
    }
    const NetGradients disc_grads = backward(disc, disc_trace, upstream);
    // Keep only the gradient w.r.t. the generated columns.
    Matrix gen_upstream(gen_in.rows(), gen_trace.output().cols());
    for (std::size_t i = 0; i < gen_upstream.rows(); ++i)
        std::memcpy(gen_upstream.row(i), disc_grads.input.row(i),
                    gen_upstream.cols() * sizeof(double));
    const NetGradients gen_grads = backward(gen, gen_trace, gen_upstream);
    adam_step(adam, gen.parameters(), gen_grads.parameters());
    return loss;
}

struct GroupMoments {
    bool present = false;
    std::vector<double> mean;
    std::vector<double> stddev;
    // Pearson correlation of every column with the outcome column; carries
    // the joint structure the CATE estimator depends on.
    std::vector<double> outcome_corr;
    std::size_t outcome_col = 0;
};

namespace moments_detail {

inline void fill_outcome_corr(GroupMoments& gm, const Matrix& z,
                              const std::vector<int>* treatment, int group) {
    gm.outcome_corr.assign(z.cols(), 0.0);
    const std::size_t y = gm.outcome_col;
    if (!(gm.stddev[y] > 0.0)) return;
    std::size_t n = 0;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        if (treatment && (*treatment)[i] != group) continue;
        ++n;
        const double dy = z(i, y) - gm.mean[y];
        for (std::size_t j = 0; j < z.cols(); ++j)
            gm.outcome_corr[j] += (z(i, j) - gm.mean[j]) * dy;
    }
    for (std::size_t j = 0; j < z.cols(); ++j) {
        const double denom =
            gm.stddev[j] * gm.stddev[y] * static_cast<double>(std::max<std::size_t>(1, n - 1));
        gm.outcome_corr[j] = denom > 0.0 ? gm.outcome_corr[j] / denom : 0.0;
    }
}

}  // namespace moments_detail

inline GroupMoments standardized_group_moments(const Matrix& z,
                                               const std::vector<int>& treatment, int group,
                                               std::size_t outcome_col) {
    GroupMoments gm;
    gm.outcome_col = outcome_col;
    gm.mean.assign(z.cols(), 0.0);
    gm.stddev.assign(z.cols(), 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < z.rows(); ++i) {
        if (treatment[i] != group) continue;
        ++n;
        for (std::size_t j = 0; j < z.cols(); ++j) gm.mean[j] += z(i, j);
    }
    if (n == 0) return gm;
    gm.present = true;
    for (double& m : gm.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        if (treatment[i] != group) continue;
        for (std::size_t j = 0; j < z.cols(); ++j) {
            const double d = z(i, j) - gm.mean[j];
            gm.stddev[j] += d * d;
        }
    }
    for (double& s : gm.stddev) s = std::sqrt(s / static_cast<double>(std::max<std::size_t>(1, n - 1)));
    moments_detail::fill_outcome_corr(gm, z, &treatment, group);
    return gm;
}

inline Matrix generate_standardized(const FeedforwardNet& gen, std::size_t noise_dim, int group,
                                    std::size_t n, Rng& rng) {
    Matrix in(n, noise_dim + 2);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = in.row(i);
        for (std::size_t j = 0; j < noise_dim; ++j) row[j] = rng.normal();
        write_onehot(row + noise_dim, group);
    }
    return forward(gen, in);
}

// Squared L2 distance between generated and real standardized moments,
// summed over the groups present in the training data. Covers per-column
// means and stds plus each column's correlation with the outcome, so run
// selection stays sensitive to the joint structure, not just the marginals.
inline double moment_distance(const FeedforwardNet& gen, std::size_t noise_dim,
                              const GroupMoments groups[2], std::size_t sample_n, Rng& rng) {
    double total = 0.0;
    for (int g = 0; g < 2; ++g) {
        if (!groups[g].present) continue;
        const Matrix sample = generate_standardized(gen, noise_dim, g, sample_n, rng);
        GroupMoments syn;
        syn.outcome_col = groups[g].outcome_col;
        syn.mean.assign(sample.cols(), 0.0);
        syn.stddev.assign(sample.cols(), 0.0);
        for (std::size_t i = 0; i < sample.rows(); ++i)
            for (std::size_t j = 0; j < sample.cols(); ++j) syn.mean[j] += sample(i, j);
        for (double& m : syn.mean) m /= static_cast<double>(sample.rows());
        for (std::size_t i = 0; i < sample.rows(); ++i)
            for (std::size_t j = 0; j < sample.cols(); ++j) {
                const double d = sample(i, j) - syn.mean[j];
                syn.stddev[j] += d * d;
            }
        for (double& s : syn.stddev)
            s = std::sqrt(s / static_cast<double>(sample.rows() - 1));
        moments_detail::fill_outcome_corr(syn, sample, nullptr, 0);

        for (std::size_t j = 0; j < sample.cols(); ++j) {
            const double dm = syn.mean[j] - groups[g].mean[j];
            const double ds = syn.stddev[j] - groups[g].stddev[j];
            const double dc = syn.outcome_corr[j] - groups[g].outcome_corr[j];
            total += dm * dm + ds * ds + dc * dc;
        }
    }
    return total;
}

struct NetParams {
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;

    static NetParams capture(const FeedforwardNet& net) { return {net.weights, net.biases}; }
    void restore(FeedforwardNet& net) const {
        net.weights = weights;
        net.biases = biases;
    }
};

}  // namespace gan_detail

// ---------------------------------------------------------------------------

// Adversarial training of the conditional generator/discriminator pair on
// (covariates, outcome) rows with the treatment one-hot as the condition.
// Snapshots track moment fidelity; the best snapshot's parameters are kept.
inline TrainResult train(const ObservationalDataset& data, const TrainConfig& config) {
    data.validate();
    if (data.size() == 0) throw TrainingError("train: empty dataset");
    config.validate(data.size());

    const DataCodec codec = gan_detail::build_codec(data, config.discrete_max_levels);
    Matrix encoded = gan_detail::encode(codec, data);
    const std::size_t enc_dim = codec.encoded_dim();

    // Standardize continuous columns; one-hot blocks stay on the 0/1 scale.
    std::vector<double> col_mean(enc_dim, 0.0), col_std(enc_dim, 1.0);
    {
        std::size_t at = 0;
        for (std::size_t col = 0; col < codec.logical_dim(); ++col) {
            const auto& enc = codec.columns[col];
            if (enc.discrete) {
                at += enc.width();
                continue;
            }
            std::vector<double> v(encoded.rows());
            for (std::size_t i = 0; i < encoded.rows(); ++i) v[i] = encoded(i, at);
            const double m = mean_of(v);
            const double s = stddev_of(v);
            if (!(s > 1e-12)) {
                const std::string name =
                    col < data.dim() ? data.column_names[col] : std::string("outcome");
                throw TrainingError("train: degenerate column '" + name + "' has zero variance");
            }
            col_mean[at] = m;
            col_std[at] = s;
            ++at;
        }
    }
    for (std::size_t i = 0; i < encoded.rows(); ++i)
        for (std::size_t j = 0; j < enc_dim; ++j)
            encoded(i, j) = (encoded(i, j) - col_mean[j]) / col_std[j];

    Matrix cond(data.size(), 2);
    for (std::size_t i = 0; i < data.size(); ++i) write_onehot(cond.row(i), data.treatment[i]);

    std::size_t outcome_slot = 0;
    for (std::size_t col = 0; col + 1 < codec.logical_dim(); ++col)
        outcome_slot += codec.columns[col].width();
    gan_detail::GroupMoments group_moments[2];
    for (int g = 0; g < 2; ++g)
        group_moments[g] =
            gan_detail::standardized_group_moments(encoded, data.treatment, g, outcome_slot);

    Rng rng(config.seed);
    Rng snapshot_rng = rng.fork(7001);

    std::vector<std::size_t> gen_dims = {config.noise_dim + 2};
    gen_dims.insert(gen_dims.end(), config.gen_hidden.begin(), config.gen_hidden.end());
    gen_dims.push_back(enc_dim);
    std::vector<std::size_t> disc_dims = {enc_dim + 2};
    disc_dims.insert(disc_dims.end(), config.disc_hidden.begin(), config.disc_hidden.end());
    disc_dims.push_back(1);

    FeedforwardNet gen(gen_dims, HiddenActivation::Relu, OutputActivation::Linear);
    FeedforwardNet disc(disc_dims, HiddenActivation::Relu, OutputActivation::Sigmoid);
    gen.init_glorot(rng);
    disc.init_glorot(rng);

    AdamState adam_gen(config.gen_lr, config.beta1, config.beta2);
    AdamState adam_disc(config.disc_lr, config.beta1, config.beta2);

    TrainingLog log;
    gan_detail::NetParams best_gen = gan_detail::NetParams::capture(gen);
    gan_detail::NetParams best_disc = gan_detail::NetParams::capture(disc);
    double best_distance = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;

    const std::size_t n = data.size();
    const std::size_t snapshot_n = std::max<std::size_t>(config.snapshot_sample, 2);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    auto take_snapshot = [&](std::size_t epoch) {
        const double dist = gan_detail::moment_distance(gen, config.noise_dim, group_moments,
                                                        snapshot_n, snapshot_rng);
        TrainingLog::Snapshot snap;
        snap.epoch = epoch;
        snap.moment_distance = dist;
        // Inverted KS of a generated standardized sample against the real
        // standardized columns, averaged over columns and present groups.
        double ks_sum = 0.0;
        std::size_t ks_terms = 0;
        for (int g = 0; g < 2; ++g) {
            if (!group_moments[g].present) continue;
            const Matrix sample = gan_detail::generate_standardized(gen, config.noise_dim, g,
                                                                    snapshot_n, snapshot_rng);
            for (std::size_t j = 0; j < enc_dim; ++j) {
                std::vector<double> real_col;
                real_col.reserve(n);
                for (std::size_t i = 0; i < n; ++i)
                    if (data.treatment[i] == g) real_col.push_back(encoded(i, j));
                std::vector<double> syn_col(sample.rows());
                for (std::size_t i = 0; i < sample.rows(); ++i) syn_col[i] = sample(i, j);
                ks_sum += inverted_ks(real_col, syn_col);
                ++ks_terms;
            }
        }
        snap.inverted_ks_mean = ks_terms ? ks_sum / static_cast<double>(ks_terms) : 0.0;
        log.snapshots.push_back(snap);
        if (dist < best_distance) {
            best_distance = dist;
            best_epoch = epoch;
            best_gen = gan_detail::NetParams::capture(gen);
            best_disc = gan_detail::NetParams::capture(disc);
        }
        return dist;
    };

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_d_loss = 0.0;
        double epoch_g_loss = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t b = std::min(config.batch_size, n - start);
            Matrix real_rows(b, enc_dim);
            Matrix batch_cond(b, 2);
            for (std::size_t i = 0; i < b; ++i) {
                const std::size_t src = order[start + i];
                std::memcpy(real_rows.row(i), encoded.row(src), enc_dim * sizeof(double));
                std::memcpy(batch_cond.row(i), cond.row(src), 2 * sizeof(double));
            }
            const Matrix real_in = gan_detail::hstack(real_rows, batch_cond);

            double d_loss = 0.0;
            for (std::size_t s = 0; s < config.disc_steps; ++s) {
                Matrix gen_in(b, config.noise_dim + 2);
                for (std::size_t i = 0; i < b; ++i) {
                    double* row = gen_in.row(i);
                    for (std::size_t j = 0; j < config.noise_dim; ++j) row[j] = rng.normal();
                    row[config.noise_dim] = batch_cond(i, 0);
                    row[config.noise_dim + 1] = batch_cond(i, 1);
                }
                const Matrix fake = forward(gen, gen_in);
                d_loss = gan_detail::discriminator_step(disc, adam_disc, real_in,
                                                        gan_detail::hstack(fake, batch_cond));
            }

            Matrix gen_in(b, config.noise_dim + 2);
            for (std::size_t i = 0; i < b; ++i) {
                double* row = gen_in.row(i);
                for (std::size_t j = 0; j < config.noise_dim; ++j) row[j] = rng.normal();
                row[config.noise_dim] = batch_cond(i, 0);
                row[config.noise_dim + 1] = batch_cond(i, 1);
            }
            const double g_loss =
                gan_detail::generator_step(gen, disc, adam_gen, gen_in, batch_cond);

            epoch_d_loss += d_loss;
            epoch_g_loss += g_loss;
            ++steps;
        }
        log.disc_loss.push_back(epoch_d_loss / static_cast<double>(steps));
        log.gen_loss.push_back(epoch_g_loss / static_cast<double>(steps));
        log.epochs_run = epoch;

        if (epoch % config.snapshot_interval == 0 || epoch == config.epochs) {
            const double dist = take_snapshot(epoch);
            if (config.early_stop_distance > 0.0 && dist <= config.early_stop_distance) {
                log.early_stopped = true;
                break;
            }
        }
    }
    if (config.epochs == 0) take_snapshot(0);

    best_gen.restore(gen);
    best_disc.restore(disc);
    log.best_epoch = best_epoch;
    log.best_distance = best_distance;

    TrainResult result;
    result.model.generator = std::move(gen);
    result.model.discriminator = std::move(disc);
    result.model.noise_dim = config.noise_dim;
    result.model.codec = codec;
    result.model.col_mean = std::move(col_mean);
    result.model.col_std = std::move(col_std);
    result.model.column_names = data.column_names;
    result.model.training_seed = config.seed;
    result.model.validate();
    result.log = std::move(log);
    return result;
}

// Repeats training with shifted seeds and keeps the run whose generated
// moments sit closest to the real data.
inline TrainResult train_with_restarts(const ObservationalDataset& data, const TrainConfig& config,
                                       std::size_t restarts) {
    if (restarts < 1) throw ConfigError("train: restarts must be at least 1");
    TrainResult best;
    bool have = false;
    for (std::size_t r = 0; r < restarts; ++r) {
        TrainConfig cfg = config;
        cfg.seed = config.seed + 0x9E3779B97F4A7C15ULL * r;
        TrainResult run = train(data, cfg);
        if (!have || run.log.best_distance < best.log.best_distance) {
            best = std::move(run);
            have = true;
        }
    }
    return best;
}

// Draws n rows for one treatment group from the trained generator and maps
// them back to the original data scale.
inline ObservationalDataset synthesize(const GanModel& model, int group, std::size_t n,
                                       std::uint64_t seed) {
    model.validate();
    if (group != 0 && group != 1) throw ConfigError("synthesize: group must be 0 or 1");
    if (n < 1) throw ConfigError("synthesize: sample count must be at least 1");

    Rng rng(seed);
    const std::size_t q = model.covariate_dim();
    ObservationalDataset out;
    out.column_names = model.column_names;
    out.covariates = Matrix(n, q);
    out.outcomes.reserve(n);
    out.treatment.assign(n, group);

    const std::size_t chunk = 8192;
    std::vector<double> logical(model.codec.logical_dim());
    std::vector<double> encoded_row(model.encoded_dim());
    std::size_t written = 0;
    while (written < n) {
        const std::size_t b = std::min(chunk, n - written);
        const Matrix sample =
            gan_detail::generate_standardized(model.generator, model.noise_dim, group, b, rng);
        for (std::size_t i = 0; i < b; ++i) {
            for (std::size_t j = 0; j < model.encoded_dim(); ++j)
                encoded_row[j] = sample(i, j) * model.col_std[j] + model.col_mean[j];
            gan_detail::decode_row(model.codec, encoded_row.data(), logical.data());
            for (std::size_t j = 0; j < q; ++j) out.covariates(written + i, j) = logical[j];
            out.outcomes.push_back(logical[q]);
        }
        written += b;
    }
    if (!out.covariates.all_finite()) throw DataError("synthesize: non-finite covariate generated");
    for (double y : out.outcomes)
        if (!std::isfinite(y)) throw DataError("synthesize: non-finite outcome generated");
    return out;
}

// ---------------------------------------------------------------------------
// Model persistence. Little-endian binary container; layout documented in
// docs/model_format.md.

namespace gan_detail {

inline constexpr char kModelMagic[8] = {'G', 'A', 'N', 'A', 'T', 'T', 'M', '1'};
inline constexpr std::uint32_t kModelVersion = 1;

inline void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 4);
}

inline void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

inline std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw ParseError("model file: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

inline std::uint32_t read_u32(std::istream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw ParseError("model file: truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

inline double read_f64(std::istream& in) {
    const std::uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
    const std::uint64_t len = read_u64(in);
    if (len > (1ULL << 20)) throw ParseError("model file: implausible string length");
    std::string s(len, '\0');
    in.read(s.data(), static_cast<std::streamsize>(len));
    if (!in) throw ParseError("model file: truncated");
    return s;
}

inline void write_net(std::ostream& out, const FeedforwardNet& net) {
    out.put(net.hidden_activation == HiddenActivation::Relu ? 0 : 1);
    out.put(net.output_activation == OutputActivation::Linear ? 0 : 1);
    write_u64(out, net.layer_dims.size());
    for (std::size_t d : net.layer_dims) write_u64(out, d);
    for (const Matrix& w : net.weights)
        for (std::size_t i = 0; i < w.size(); ++i) write_f64(out, w.data()[i]);
    for (const Matrix& b : net.biases)
        for (std::size_t i = 0; i < b.size(); ++i) write_f64(out, b.data()[i]);
}

inline FeedforwardNet read_net(std::istream& in) {
    const int hidden = in.get();
    const int output = in.get();
    if (!in || hidden < 0 || hidden > 1 || output < 0 || output > 1)
        throw ParseError("model file: bad activation tag");
    const std::uint64_t n_dims = read_u64(in);
    if (n_dims < 2 || n_dims > 64) throw ParseError("model file: implausible layer count");
    std::vector<std::size_t> dims(n_dims);
    for (auto& d : dims) {
        d = read_u64(in);
        if (d == 0 || d > (1ULL << 20)) throw ParseError("model file: implausible layer width");
    }
    FeedforwardNet net(dims, hidden == 0 ? HiddenActivation::Relu : HiddenActivation::Tanh,
                       output == 0 ? OutputActivation::Linear : OutputActivation::Sigmoid);
    for (Matrix& w : net.weights)
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = read_f64(in);
    for (Matrix& b : net.biases)
        for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = read_f64(in);
    return net;
}

}  // namespace gan_detail

inline void save_model(const GanModel& model, const std::string& path) {
    model.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(gan_detail::kModelMagic, 8);
    gan_detail::write_u32(out, gan_detail::kModelVersion);
    gan_detail::write_u64(out, model.training_seed);
    gan_detail::write_u64(out, model.noise_dim);
    gan_detail::write_u64(out, model.covariate_dim());
    for (const auto& name : model.column_names) gan_detail::write_string(out, name);
    gan_detail::write_u64(out, model.codec.logical_dim());
    for (const auto& col : model.codec.columns) {
        out.put(col.discrete ? 1 : 0);
        if (col.discrete) {
            gan_detail::write_u64(out, col.levels.size());
            for (double v : col.levels) gan_detail::write_f64(out, v);
        }
    }
    gan_detail::write_u64(out, model.encoded_dim());
    for (double v : model.col_mean) gan_detail::write_f64(out, v);
    for (double v : model.col_std) gan_detail::write_f64(out, v);
    gan_detail::write_net(out, model.generator);
    gan_detail::write_net(out, model.discriminator);
    if (!out) throw IoError("write failed: " + path);
}

inline GanModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("input not found: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, gan_detail::kModelMagic, 8) != 0)
        throw ParseError(path + ": not a model file");
    const std::uint32_t version = gan_detail::read_u32(in);
    if (version != gan_detail::kModelVersion)
        throw ParseError(path + ": unsupported model version " + std::to_string(version));
    GanModel model;
    model.training_seed = gan_detail::read_u64(in);
    model.noise_dim = gan_detail::read_u64(in);
    const std::uint64_t q = gan_detail::read_u64(in);
    if (q == 0 || q > (1ULL << 16)) throw ParseError(path + ": implausible covariate count");
    for (std::uint64_t j = 0; j < q; ++j)
        model.column_names.push_back(gan_detail::read_string(in));
    const std::uint64_t logical = gan_detail::read_u64(in);
    if (logical != q + 1) throw ParseError(path + ": dimension mismatch in column metadata");
    for (std::uint64_t j = 0; j < logical; ++j) {
        const int tag = in.get();
        if (tag != 0 && tag != 1) throw ParseError(path + ": bad column tag");
        ColumnEncoding enc;
        enc.discrete = tag == 1;
        if (enc.discrete) {
            const std::uint64_t levels = gan_detail::read_u64(in);
            if (levels == 0 || levels > (1ULL << 16))
                throw ParseError(path + ": implausible level count");
            for (std::uint64_t l = 0; l < levels; ++l)
                enc.levels.push_back(gan_detail::read_f64(in));
        }
        model.codec.columns.push_back(std::move(enc));
    }
    const std::uint64_t enc_dim = gan_detail::read_u64(in);
    if (enc_dim != model.codec.encoded_dim())
        throw ParseError(path + ": dimension mismatch between codec and data width");
    for (std::uint64_t j = 0; j < enc_dim; ++j) model.col_mean.push_back(gan_detail::read_f64(in));
    for (std::uint64_t j = 0; j < enc_dim; ++j) model.col_std.push_back(gan_detail::read_f64(in));
    model.generator = gan_detail::read_net(in);
    model.discriminator = gan_detail::read_net(in);
    in.peek();
    if (!in.eof()) throw ParseError(path + ": trailing bytes after model payload");
    try {
        model.validate();
    } catch (const Error& e) {
        throw ParseError(path + ": dimension mismatch: " + e.what());
    }
    return model;
}

}  // namespace ganatt
