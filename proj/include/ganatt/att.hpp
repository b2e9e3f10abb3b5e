#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ganatt/benchmark.hpp"
#include "ganatt/cate.hpp"
#include "ganatt/gan.hpp"
#include "ganatt/metrics.hpp"

namespace ganatt {

struct AttEstimate {
    double att = 0.0;
    double std_err = 0.0;
    std::size_t n_used = 0;
    std::size_t n_dropped = 0;
    std::vector<double> per_sample_cates;  // supported samples, in input order

    double ci95_low() const { return att - 1.959963984540054 * std_err; }
    double ci95_high() const { return att + 1.959963984540054 * std_err; }
};

// Ensemble average of the CATE surface over the treated covariate rows.
// Rows falling outside common support are counted, never imputed.
inline AttEstimate estimate_att(const CateFunction& cate, const Matrix& treated_covariates) {
    if (treated_covariates.cols() != cate.grid().dim())
        throw ShapeError("estimate_att: covariate dimension does not match grid");
    AttEstimate est;
    est.per_sample_cates.reserve(treated_covariates.rows());
    double sum = 0.0;
    for (std::size_t i = 0; i < treated_covariates.rows(); ++i) {
        const auto dy = cate.evaluate(treated_covariates.row(i), treated_covariates.cols());
        if (!dy) {
            est.n_dropped += 1;
            continue;
        }
        est.per_sample_cates.push_back(*dy);
        sum += *dy;
        est.n_used += 1;
    }
    if (est.n_used == 0) throw EstimationError("estimate_att: no common support");
    est.att = sum / static_cast<double>(est.n_used);
    if (est.n_used > 1) {
        double ss = 0.0;
        for (double v : est.per_sample_cates) ss += (v - est.att) * (v - est.att);
        est.std_err = std::sqrt(ss / static_cast<double>(est.n_used - 1)) /
                      std::sqrt(static_cast<double>(est.n_used));
    }
    return est;
}

// ---------------------------------------------------------------------------

struct PipelineConfig {
    TrainConfig train;
    std::size_t restarts = 1;
    std::size_t synth_n = 100000;  // per group
    GridConfig grid;
    bool separate_models = false;  // one GAN per group instead of a merged conditional one
    // With separate models the control model may need a different epoch
    // budget, e.g. when the treated group is noise-augmented; 0 keeps
    // train.epochs for both.
    std::size_t control_epochs = 0;
    std::size_t augment_treated_factor = 1;
    double augment_rel_sigma = 0.1;
    std::string out_dir;  // empty: keep everything in memory
    bool include_timings = false;
    std::uint64_t seed = 42;
};

struct PipelineResult {
    AttEstimate att;
    FidelityReport fidelity0;
    FidelityReport fidelity1;
    TrainingLog log;
    std::size_t train_rows0 = 0;
    std::size_t train_rows1 = 0;
    std::size_t supported_cubes = 0;
    std::string report_text;
};

namespace detail {

template <typename F>
auto run_stage(const std::string& stage, F&& body) {
    auto prefix = [&](const char* what) { return "stage " + stage + ": " + what; };
    try {
        return body();
    } catch (const ShapeError& e) {
        throw ShapeError(prefix(e.what()));
    } catch (const ConfigError& e) {
        throw ConfigError(prefix(e.what()));
    } catch (const ParseError& e) {
        throw ParseError(prefix(e.what()));
    } catch (const TrainingError& e) {
        throw TrainingError(prefix(e.what()));
    } catch (const EstimationError& e) {
        throw EstimationError(prefix(e.what()));
    } catch (const IoError& e) {
        throw IoError(prefix(e.what()));
    } catch (const DataError& e) {
        throw DataError(prefix(e.what()));
    }
}

inline std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace detail

// Trains on the (possibly augmented) sample, synthesizes a large sample per
// group, builds the cube CATE surface and averages it over the real treated
// covariates. Artifacts land in config.out_dir when set.
inline PipelineResult run_pipeline(const ObservationalDataset& real_data, PipelineConfig config) {
    using clock = std::chrono::steady_clock;
    struct StageTime {
        std::string name;
        double seconds;
    };
    std::vector<StageTime> timings;
    auto timed = [&](const std::string& stage, auto&& body) {
        const auto t0 = clock::now();
        auto cleanup = [&] {
            timings.push_back({stage, std::chrono::duration<double>(clock::now() - t0).count()});
        };
        try {
            auto r = detail::run_stage(stage, body);
            cleanup();
            return r;
        } catch (...) {
            cleanup();
            throw;
        }
    };

    real_data.validate();
    const std::size_t n0 = real_data.count_group(0);
    const std::size_t n1 = real_data.count_group(1);
    if (n0 == 0 || n1 == 0)
        throw DataError("pipeline: dataset must contain both treatment groups");
    if (config.synth_n == 0) throw ConfigError("pipeline: synth_n must be positive");

    config.train.seed = config.seed;
    const ObservationalDataset real0 = real_data.filter_group(0);
    const ObservationalDataset real1 = real_data.filter_group(1);

    // Stage 0: optional treated-group augmentation (training input only; the
    // evaluation set stays the original treated covariates).
    ObservationalDataset train_data = timed("augment", [&] {
        if (config.augment_treated_factor <= 1) return real_data;
        const ObservationalDataset aug1 = augment_with_relative_noise(
            real1, config.augment_treated_factor, config.augment_rel_sigma, config.seed ^ 0xA6u);
        return ObservationalDataset::concat(real0, aug1);
    });
    const std::size_t train_rows0 = train_data.count_group(0);
    const std::size_t train_rows1 = train_data.count_group(1);

    // Stage 1: joint density learning.
    struct Models {
        GanModel model0;  // used when separate_models
        GanModel model1;  // also the merged model
        TrainingLog log;
    };
    Models models = timed("train", [&]() -> Models {
        Models m;
        if (config.separate_models) {
            TrainConfig c0 = config.train;
            if (config.control_epochs > 0) c0.epochs = config.control_epochs;
            TrainConfig c1 = config.train;
            c1.seed = config.train.seed + 1;
            auto r0 = train_with_restarts(train_data.filter_group(0), c0, config.restarts);
            auto r1 = train_with_restarts(train_data.filter_group(1), c1, config.restarts);
            m.model0 = std::move(r0.model);
            m.model1 = std::move(r1.model);
            m.log = std::move(r1.log);
        } else {
            auto r = train_with_restarts(train_data, config.train, config.restarts);
            m.model1 = std::move(r.model);
            m.log = std::move(r.log);
        }
        return m;
    });
    const GanModel& model_for0 = config.separate_models ? models.model0 : models.model1;
    const GanModel& model_for1 = models.model1;

    // Stage 2: synthetic sample generation.
    ObservationalDataset synth0 = timed("synthesize0", [&] {
        return synthesize(model_for0, 0, config.synth_n, config.seed + 101);
    });
    ObservationalDataset synth1 = timed("synthesize1", [&] {
        return synthesize(model_for1, 1, config.synth_n, config.seed + 202);
    });

    // Stage 3: cube-histogram CATE surface.
    CateFunction cate = timed("grid", [&] { return build_grid(synth0, synth1, config.grid); });

    // Stage 4: ensemble average over the real treated covariates.
    AttEstimate att = timed("estimate", [&] { return estimate_att(cate, real1.covariates); });

    PipelineResult result;
    result.att = std::move(att);
    result.log = std::move(models.log);
    result.train_rows0 = train_rows0;
    result.train_rows1 = train_rows1;
    result.supported_cubes = cate.supported_cubes();
    result.fidelity0 = timed("fidelity0", [&] { return fidelity_report(real0, synth0); });
    result.fidelity1 = timed("fidelity1", [&] { return fidelity_report(real1, synth1); });

    // Run report.
    std::ostringstream rep;
    rep << "[run]\n";
    rep << "tool = ganatt\n";
    rep << "seed = " << config.seed << "\n";
    rep << "rows = " << real_data.size() << "\n";
    rep << "treated = " << n1 << "\n";
    rep << "controls = " << n0 << "\n";
    rep << "covariates = " << real_data.dim() << "\n";
    rep << "\n[config]\n";
    rep << "epochs = " << config.train.epochs << "\n";
    rep << "control_epochs = " << config.control_epochs << "\n";
    rep << "batch_size = " << config.train.batch_size << "\n";
    rep << "noise_dim = " << config.train.noise_dim << "\n";
    rep << "gen_hidden =";
    for (std::size_t w : config.train.gen_hidden) rep << " " << w;
    rep << "\ndisc_hidden =";
    for (std::size_t w : config.train.disc_hidden) rep << " " << w;
    rep << "\ngen_lr = " << detail::fmt6(config.train.gen_lr) << "\n";
    rep << "disc_lr = " << detail::fmt6(config.train.disc_lr) << "\n";
    rep << "adam_beta1 = " << detail::fmt6(config.train.beta1) << "\n";
    rep << "adam_beta2 = " << detail::fmt6(config.train.beta2) << "\n";
    rep << "disc_steps = " << config.train.disc_steps << "\n";
    rep << "restarts = " << config.restarts << "\n";
    rep << "separate_models = " << (config.separate_models ? 1 : 0) << "\n";
    rep << "synth_n = " << config.synth_n << "\n";
    rep << "grid_bins =";
    if (config.grid.bins_per_dim.empty())
        rep << " auto";
    else
        for (std::size_t b : config.grid.bins_per_dim) rep << " " << b;
    rep << "\nmin_count = " << config.grid.min_count << "\n";
    rep << "augment_treated_factor = " << config.augment_treated_factor << "\n";
    rep << "augment_rel_sigma = " << detail::fmt6(config.augment_rel_sigma) << "\n";
    rep << "\n[training]\n";
    rep << "train_rows_control = " << train_rows0 << "\n";
    rep << "train_rows_treated = " << train_rows1 << "\n";
    rep << "epochs_run = " << result.log.epochs_run << "\n";
    rep << "best_epoch = " << result.log.best_epoch << "\n";
    rep << "best_moment_distance = " << detail::fmt6(result.log.best_distance) << "\n";
    rep << "early_stopped = " << (result.log.early_stopped ? 1 : 0) << "\n";
    if (!result.log.disc_loss.empty()) {
        rep << "final_disc_loss = " << detail::fmt6(result.log.disc_loss.back()) << "\n";
        rep << "final_gen_loss = " << detail::fmt6(result.log.gen_loss.back()) << "\n";
    }
    for (int g = 0; g < 2; ++g) {
        const FidelityReport& f = g == 0 ? result.fidelity0 : result.fidelity1;
        rep << "\n[fidelity_group" << g << "]\n";
        for (std::size_t j = 0; j < f.columns.size(); ++j)
            rep << "inverted_ks_" << f.columns[j] << " = " << detail::fmt6(f.inverted_ks_cols[j])
                << "\n";
        rep << "inverted_ks_mean = " << detail::fmt6(f.inverted_ks_mean) << "\n";
        for (std::size_t j = 0; j < f.columns.size(); ++j)
            rep << "kl_" << f.columns[j] << " = " << detail::fmt6(f.kl_cols[j]) << "\n";
        rep << "kl_mean = " << detail::fmt6(f.kl_mean) << "\n";
    }
    rep << "\n[grid]\n";
    for (std::size_t j = 0; j < cate.grid().dim(); ++j)
        rep << "dim" << j << " = bins " << cate.grid().bins()[j] << " over ["
            << detail::fmt6(cate.grid().lower()[j]) << ", " << detail::fmt6(cate.grid().upper()[j])
            << "]\n";
    rep << "supported_cubes = " << result.supported_cubes << "\n";
    rep << "overflow_control = " << cate.grid().overflow(0) << "\n";
    rep << "overflow_treated = " << cate.grid().overflow(1) << "\n";
    rep << "\n[estimate]\n";
    rep << "att = " << detail::fmt6(result.att.att) << "\n";
    rep << "std_err = " << detail::fmt6(result.att.std_err) << "\n";
    rep << "ci95 = [" << detail::fmt6(result.att.ci95_low()) << ", "
        << detail::fmt6(result.att.ci95_high()) << "]\n";
    rep << "n_used = " << result.att.n_used << "\n";
    rep << "n_dropped = " << result.att.n_dropped << "\n";
    if (result.att.n_dropped * 20 > n1)
        rep << "warning = more than 5% of treated rows lack support; raise synth_n\n";
    if (config.include_timings) {
        rep << "\n[timings]\n";
        for (const auto& t : timings)
            rep << t.name << "_seconds = " << detail::fmt6(t.seconds) << "\n";
    }
    result.report_text = rep.str();

    if (!config.out_dir.empty()) {
        namespace fs = std::filesystem;
        detail::run_stage("artifacts", [&] {
            fs::create_directories(config.out_dir);
            const fs::path dir(config.out_dir);
            if (config.separate_models) {
                save_model(models.model0, (dir / "model_control.gam").string());
                save_model(models.model1, (dir / "model_treated.gam").string());
            } else {
                save_model(models.model1, (dir / "model.gam").string());
            }
            save_csv(synth0, (dir / "synthetic0.csv").string());
            save_csv(synth1, (dir / "synthetic1.csv").string());
            export_cate_surface(cate, (dir / "cate_surface.csv").string());
            result.log.write_csv((dir / "training_log.csv").string());
            std::ofstream out(dir / "report.txt");
            if (!out) throw IoError("cannot open report for writing");
            out << result.report_text;
            return 0;
        });
    }
    return result;
}

}  // namespace ganatt
