// Command-line front end: benchmark generation, GAN training, synthesis,
// ATT estimation and matching-estimator comparisons.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ganatt/ganatt.hpp"

namespace fs = std::filesystem;
using namespace ganatt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTraining = 3;
constexpr int kExitEstimation = 4;

struct CsvOptions {
    std::string outcome_col = "y";
    std::string treatment_col = "d";
};

void add_csv_options(CLI::App* cmd, CsvOptions& opts) {
    cmd->add_option("--outcome-col", opts.outcome_col, "Name of the outcome column")
        ->capture_default_str();
    cmd->add_option("--treatment-col", opts.treatment_col, "Name of the treatment dummy column")
        ->capture_default_str();
}

ObservationalDataset load_data(const std::string& path, const CsvOptions& opts,
                               LoadReport* report = nullptr) {
    CsvSchema schema;
    schema.outcome_column = opts.outcome_col;
    schema.treatment_column = opts.treatment_col;
    return load_csv(path, schema, report);
}

struct TrainFlags {
    TrainConfig config;
    std::size_t restarts = 1;
};

void add_train_options(CLI::App* cmd, TrainFlags& flags) {
    cmd->add_option("--epochs", flags.config.epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--batch-size", flags.config.batch_size, "Minibatch size")
        ->capture_default_str();
    cmd->add_option("--noise-dim", flags.config.noise_dim, "Generator noise dimension")
        ->capture_default_str();
    cmd->add_option("--gen-hidden", flags.config.gen_hidden, "Generator hidden layer widths")
        ->capture_default_str();
    cmd->add_option("--disc-hidden", flags.config.disc_hidden,
                    "Discriminator hidden layer widths")
        ->capture_default_str();
    cmd->add_option("--gen-lr", flags.config.gen_lr, "Generator Adam learning rate")
        ->capture_default_str();
    cmd->add_option("--disc-lr", flags.config.disc_lr, "Discriminator Adam learning rate")
        ->capture_default_str();
    cmd->add_option("--beta1", flags.config.beta1, "Adam beta1")->capture_default_str();
    cmd->add_option("--beta2", flags.config.beta2, "Adam beta2")->capture_default_str();
    cmd->add_option("--disc-steps", flags.config.disc_steps,
                    "Discriminator updates per generator update")
        ->capture_default_str();
    cmd->add_option("--snapshot-interval", flags.config.snapshot_interval,
                    "Epochs between fidelity snapshots")
        ->capture_default_str();
    cmd->add_option("--early-stop", flags.config.early_stop_distance,
                    "Stop once the snapshot moment distance falls below this (0 disables)")
        ->capture_default_str();
    cmd->add_option("--discrete-max-levels", flags.config.discrete_max_levels,
                    "Columns with at most this many distinct values are treated as discrete "
                    "(0 disables)")
        ->capture_default_str();
    cmd->add_option("--restarts", flags.restarts,
                    "Training restarts; the run with the best moment fidelity is kept")
        ->capture_default_str();
}

int classify(const Error& e) {
    if (dynamic_cast<const TrainingError*>(&e)) return kExitTraining;
    if (dynamic_cast<const EstimationError*>(&e)) return kExitEstimation;
    if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
    return kExitData;  // DataError, ParseError, IoError, ShapeError
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string kind;
    std::string out;
    std::string spec_out;
    std::string spec_in;
    std::uint64_t seed = 42;
    std::uint64_t draw_seed = 0;  // 0: reuse seed
    std::size_t mc_draws = 10000000;
    std::optional<double> alpha, beta, gamma, sigma, mu0, mu1;
    std::optional<double> sigma_x0, sigma_x1, sigma_eps;
    std::optional<std::size_t> n0, n1;
};

int cmd_generate(const GenerateArgs& args) {
    std::string spec_path = args.spec_out;
    if (spec_path.empty()) spec_path = args.out + ".spec";

    std::string kind = args.kind;
    if (!args.spec_in.empty()) kind = spec_kind(args.spec_in);

    if (kind == "linear") {
        LinearBenchmarkSpec spec;
        if (!args.spec_in.empty()) spec = load_linear_spec(args.spec_in);
        if (args.alpha) spec.alpha = *args.alpha;
        if (args.beta) spec.beta = *args.beta;
        if (args.gamma) spec.gamma = *args.gamma;
        if (args.mu0) spec.mu0 = *args.mu0;
        if (args.mu1) spec.mu1 = *args.mu1;
        if (args.sigma_x0) spec.sigma_x0 = *args.sigma_x0;
        if (args.sigma_x1) spec.sigma_x1 = *args.sigma_x1;
        if (args.sigma_eps) spec.sigma_eps = *args.sigma_eps;
        if (args.n0) spec.n0 = *args.n0;
        if (args.n1) spec.n1 = *args.n1;
        spec.seed = args.seed;
        const ObservationalDataset data = generate_linear(spec);
        save_csv(data, args.out);
        save_spec(spec, spec_path);
        std::cout << "wrote " << data.size() << " rows to " << args.out << "\n";
        std::cout << "att_truth = " << fmt(spec.gamma) << " (" << spec_path << ")\n";
        return kExitOk;
    }
    if (kind == "nonlinear") {
        NonlinearBenchmarkSpec spec;
        GroundTruth truth;
        bool have_truth = false;
        if (!args.spec_in.empty()) {
            GroundTruth loaded;
            spec = load_nonlinear_spec(args.spec_in, &loaded);
            if (loaded.n_draws > 0) {
                truth = loaded;
                have_truth = true;
            }
        } else {
            spec = NonlinearBenchmarkSpec::random_draw(args.draw_seed ? args.draw_seed : args.seed);
        }
        if (args.alpha) spec.alpha = *args.alpha;
        if (args.beta) spec.beta = *args.beta;
        if (args.gamma) spec.gamma = *args.gamma;
        if (args.sigma) spec.sigma = *args.sigma;
        if (args.sigma_eps) spec.sigma_eps = *args.sigma_eps;
        if (args.n0) spec.n0 = *args.n0;
        if (args.n1) spec.n1 = *args.n1;
        spec.seed = args.seed;
        if (!have_truth) truth = monte_carlo_ground_truth(spec, args.mc_draws);
        const ObservationalDataset data = generate_nonlinear(spec);
        save_csv(data, args.out);
        save_spec(spec, spec_path, &truth);
        std::cout << "wrote " << data.size() << " rows to " << args.out << "\n";
        std::cout << "att_truth = " << fmt(truth.att) << " +/- " << fmt(truth.std_err) << " ("
                  << spec_path << ")\n";
        return kExitOk;
    }
    throw ConfigError("unknown benchmark kind '" + kind + "'");
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
    std::string data_path;
    std::string out_dir;
    CsvOptions csv;
    TrainFlags train;
    std::size_t synth_n = 100000;
    std::size_t bins = 0;  // 0: auto
    std::size_t min_count = 5;
    bool separate_models = false;
    std::size_t control_epochs = 0;
    std::size_t augment_factor = 1;
    double augment_rel_sigma = 0.1;
    bool timings = false;
    std::uint64_t seed = 42;
};

PipelineConfig to_pipeline_config(const EstimateArgs& args, std::size_t q) {
    PipelineConfig config;
    config.train = args.train.config;
    config.restarts = args.train.restarts;
    config.synth_n = args.synth_n;
    if (args.bins > 0) config.grid.bins_per_dim.assign(q, args.bins);
    config.grid.min_count = args.min_count;
    config.separate_models = args.separate_models;
    config.control_epochs = args.control_epochs;
    config.augment_treated_factor = args.augment_factor;
    config.augment_rel_sigma = args.augment_rel_sigma;
    config.out_dir = args.out_dir;
    config.include_timings = args.timings;
    config.seed = args.seed;
    return config;
}

int cmd_estimate(const EstimateArgs& args) {
    const ObservationalDataset data = load_data(args.data_path, args.csv);
    const PipelineResult result = run_pipeline(data, to_pipeline_config(args, data.dim()));
    std::cout << result.report_text;
    if (!args.out_dir.empty()) std::cout << "\nartifacts written to " << args.out_dir << "\n";
    return kExitOk;
}

struct CompareArgs {
    EstimateArgs estimate;
    std::size_t nn_k = 3;
    double caliper = 0.0;    // 0: none
    double bandwidth = 0.0;  // 0: rule of thumb
    std::size_t cem_bins = 0;  // 0: Sturges
};

struct CompareRow {
    std::string estimator;
    bool ok = false;
    AttEstimate att;
    std::size_t controls_used = 0;
    bool has_controls_count = false;
    std::string error;
};

int cmd_compare(const CompareArgs& args) {
    const ObservationalDataset data = load_data(args.estimate.data_path, args.estimate.csv);
    std::vector<CompareRow> rows;

    {
        CompareRow row;
        row.estimator = "gan-att";
        try {
            EstimateArgs ea = args.estimate;
            if (!ea.out_dir.empty()) ea.out_dir = (fs::path(ea.out_dir) / "gan").string();
            const PipelineResult result = run_pipeline(data, to_pipeline_config(ea, data.dim()));
            row.att = result.att;
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }

    std::vector<double> scores;
    std::string propensity_error;
    try {
        scores = fit_propensity(data).scores(data);
    } catch (const Error& e) {
        propensity_error = e.what();
    }

    auto run_matcher = [&](const std::string& name, auto&& matcher) {
        CompareRow row;
        row.estimator = name;
        try {
            const MatchResult match = matcher();
            row.att = att_from_matches(match, data);
            row.controls_used = match.controls_used;
            row.has_controls_count = true;
            row.ok = true;
            if (!args.estimate.out_dir.empty()) {
                fs::create_directories(args.estimate.out_dir);
                export_match_csv(match,
                                 (fs::path(args.estimate.out_dir) / ("match_" + name + ".csv"))
                                     .string());
            }
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    };

    if (propensity_error.empty()) {
        run_matcher("psm-nn", [&] {
            return match_nn(scores, data, args.nn_k,
                            args.caliper > 0.0 ? std::optional<double>(args.caliper)
                                               : std::nullopt);
        });
        run_matcher("psm-kernel", [&] {
            const double h =
                args.bandwidth > 0.0 ? args.bandwidth : silverman_bandwidth(scores, data);
            return match_kernel(scores, data, h);
        });
    } else {
        for (const char* name : {"psm-nn", "psm-kernel"}) {
            CompareRow row;
            row.estimator = name;
            row.error = "propensity fit failed: " + propensity_error;
            rows.push_back(std::move(row));
        }
    }
    run_matcher("cem", [&] {
        std::vector<std::size_t> bins;
        if (args.cem_bins > 0) bins.assign(data.dim(), args.cem_bins);
        return match_cem(data, bins);
    });

    // Text table.
    std::printf("%-12s %12s %12s %14s %14s\n", "estimator", "att", "std_err", "treated_used",
                "controls_used");
    for (const auto& row : rows) {
        if (row.ok) {
            std::printf("%-12s %12s %12s %14zu ", row.estimator.c_str(), fmt(row.att.att).c_str(),
                        fmt(row.att.std_err).c_str(), row.att.n_used);
            if (row.has_controls_count)
                std::printf("%14zu\n", row.controls_used);
            else
                std::printf("%14s\n", "-");
        } else {
            std::printf("%-12s failed: %s\n", row.estimator.c_str(), row.error.c_str());
        }
    }

    if (!args.estimate.out_dir.empty()) {
        fs::create_directories(args.estimate.out_dir);
        const fs::path csv_path = fs::path(args.estimate.out_dir) / "comparison.csv";
        std::ofstream out(csv_path);
        if (!out) throw IoError("cannot open for writing: " + csv_path.string());
        out << "estimator,status,att,std_err,treated_used,treated_dropped,controls_used\n";
        for (const auto& row : rows) {
            out << row.estimator << ",";
            if (row.ok) {
                out << "ok," << detail::format_double(row.att.att) << ","
                    << detail::format_double(row.att.std_err) << "," << row.att.n_used << ","
                    << row.att.n_dropped << ",";
                if (row.has_controls_count)
                    out << row.controls_used;
                out << "\n";
            } else {
                out << "error,,,,,\n";
            }
        }
        std::cout << "comparison written to " << csv_path.string() << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

int main_guarded(int argc, char** argv) {
    CLI::App app{"GAN-based treatment-effect estimation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key = value config file; flags take precedence");
    app.get_config_formatter_base()->comment('#');

    // generate-benchmark
    GenerateArgs gen;
    auto* cmd_gen = app.add_subcommand("generate-benchmark",
                                       "Generate a benchmark dataset with recorded ground truth");
    cmd_gen->add_option("--kind", gen.kind, "Benchmark kind: linear or nonlinear")
        ->check(CLI::IsMember({"linear", "nonlinear"}));
    cmd_gen->add_option("--out", gen.out, "Output dataset CSV path")->required();
    cmd_gen->add_option("--spec-out", gen.spec_out, "Spec file path (default: <out>.spec)");
    cmd_gen->add_option("--spec-in", gen.spec_in,
                        "Regenerate from an existing spec file instead of drawing parameters");
    cmd_gen->add_option("--seed", gen.seed, "Sampling seed")->capture_default_str();
    cmd_gen->add_option("--draw-seed", gen.draw_seed,
                        "Seed for the nonlinear parameter draw (default: --seed)");
    cmd_gen->add_option("--mc-draws", gen.mc_draws,
                        "Monte-Carlo draws for the nonlinear ground truth")
        ->capture_default_str();
    cmd_gen->add_option("--alpha", gen.alpha, "Model alpha");
    cmd_gen->add_option("--beta", gen.beta, "Model beta");
    cmd_gen->add_option("--gamma", gen.gamma, "Treatment effect scale (linear: the ATT)");
    cmd_gen->add_option("--sigma", gen.sigma, "Nonlinear effect width");
    cmd_gen->add_option("--mu0", gen.mu0, "Linear control covariate mean");
    cmd_gen->add_option("--mu1", gen.mu1, "Linear treated covariate mean");
    cmd_gen->add_option("--sigma-x0", gen.sigma_x0, "Linear control covariate std dev");
    cmd_gen->add_option("--sigma-x1", gen.sigma_x1, "Linear treated covariate std dev");
    cmd_gen->add_option("--sigma-eps", gen.sigma_eps, "Outcome noise std dev");
    cmd_gen->add_option("--n0", gen.n0, "Control rows");
    cmd_gen->add_option("--n1", gen.n1, "Treated rows");

    // train
    struct {
        std::string data_path, model_out, log_out;
        CsvOptions csv;
        TrainFlags train;
        std::uint64_t seed = 42;
    } tr;
    auto* cmd_train = app.add_subcommand("train", "Train a conditional GAN on a dataset");
    cmd_train->add_option("--data", tr.data_path, "Input dataset CSV")->required();
    cmd_train->add_option("--model-out", tr.model_out, "Output model file")->required();
    cmd_train->add_option("--log-out", tr.log_out, "Training loss curve CSV");
    cmd_train->add_option("--seed", tr.seed, "Training seed")->capture_default_str();
    add_csv_options(cmd_train, tr.csv);
    add_train_options(cmd_train, tr.train);

    // synthesize
    struct {
        std::string model_path, out;
        int group = 1;
        std::size_t n = 1000;
        std::uint64_t seed = 42;
    } syn;
    auto* cmd_syn = app.add_subcommand("synthesize", "Generate rows from a trained model");
    cmd_syn->add_option("--model", syn.model_path, "Model file")->required();
    cmd_syn->add_option("--group", syn.group, "Treatment group to condition on (0 or 1)")
        ->check(CLI::IsMember({0, 1}))
        ->capture_default_str();
    cmd_syn->add_option("--n", syn.n, "Rows to generate")->capture_default_str();
    cmd_syn->add_option("--seed", syn.seed, "Generation seed")->capture_default_str();
    cmd_syn->add_option("--out", syn.out, "Output CSV path")->required();

    // estimate
    EstimateArgs est;
    auto* cmd_est = app.add_subcommand("estimate", "Run the full GAN-ATT pipeline");
    cmd_est->add_option("--data", est.data_path, "Input dataset CSV")->required();
    cmd_est->add_option("--out-dir", est.out_dir, "Directory for run artifacts");
    cmd_est->add_option("--seed", est.seed, "Master seed")->capture_default_str();
    cmd_est->add_option("--synth-n", est.synth_n, "Synthetic rows per group")
        ->capture_default_str();
    cmd_est->add_option("--bins", est.bins, "Cubes per covariate dimension (0: auto)")
        ->capture_default_str();
    cmd_est->add_option("--min-count", est.min_count,
                        "Minimum per-group samples for a cube to count as supported")
        ->capture_default_str();
    cmd_est->add_flag("--separate-models", est.separate_models,
                      "Train one GAN per group instead of a merged conditional GAN");
    cmd_est->add_option("--control-epochs", est.control_epochs,
                        "Epoch budget for the control model under --separate-models "
                        "(0: same as --epochs)")
        ->capture_default_str();
    cmd_est->add_option("--augment-factor", est.augment_factor,
                        "Replicate treated rows this many times with input noise (1 disables)")
        ->capture_default_str();
    cmd_est->add_option("--augment-rel-sigma", est.augment_rel_sigma,
                        "Augmentation noise as a fraction of each column's std dev")
        ->capture_default_str();
    cmd_est->add_flag("--timings", est.timings, "Include stage timings in the report");
    add_csv_options(cmd_est, est.csv);
    add_train_options(cmd_est, est.train);

    // compare
    CompareArgs cmp;
    auto* cmd_cmp =
        app.add_subcommand("compare", "Run GAN-ATT, PSM-NN, PSM-Kernel and CEM side by side");
    cmd_cmp->add_option("--data", cmp.estimate.data_path, "Input dataset CSV")->required();
    cmd_cmp->add_option("--out-dir", cmp.estimate.out_dir, "Directory for run artifacts");
    cmd_cmp->add_option("--seed", cmp.estimate.seed, "Master seed")->capture_default_str();
    cmd_cmp->add_option("--synth-n", cmp.estimate.synth_n, "Synthetic rows per group")
        ->capture_default_str();
    cmd_cmp->add_option("--bins", cmp.estimate.bins, "Cubes per dimension for GAN-ATT (0: auto)")
        ->capture_default_str();
    cmd_cmp->add_option("--min-count", cmp.estimate.min_count, "Support threshold per cube")
        ->capture_default_str();
    cmd_cmp->add_flag("--separate-models", cmp.estimate.separate_models,
                      "Train one GAN per group instead of a merged conditional GAN");
    cmd_cmp->add_option("--control-epochs", cmp.estimate.control_epochs,
                        "Epoch budget for the control model under --separate-models "
                        "(0: same as --epochs)")
        ->capture_default_str();
    cmd_cmp->add_option("--augment-factor", cmp.estimate.augment_factor,
                        "Treated-row augmentation factor for GAN training")
        ->capture_default_str();
    cmd_cmp->add_option("--augment-rel-sigma", cmp.estimate.augment_rel_sigma,
                        "Augmentation noise scale")
        ->capture_default_str();
    cmd_cmp->add_option("--nn-k", cmp.nn_k, "Nearest-neighbor matches per treated row")
        ->capture_default_str();
    cmd_cmp->add_option("--caliper", cmp.caliper,
                        "Propensity-score caliper for PSM-NN (0: none)")
        ->capture_default_str();
    cmd_cmp->add_option("--bandwidth", cmp.bandwidth,
                        "Kernel bandwidth for PSM-Kernel (0: Silverman rule of thumb)")
        ->capture_default_str();
    cmd_cmp->add_option("--cem-bins", cmp.cem_bins, "CEM bins per dimension (0: Sturges)")
        ->capture_default_str();
    add_csv_options(cmd_cmp, cmp.estimate.csv);
    add_train_options(cmd_cmp, cmp.estimate.train);

    // report
    struct {
        std::string run_dir, real_path, synth_path, out;
        CsvOptions csv;
    } rep;
    auto* cmd_rep = app.add_subcommand("report", "Print a run report or fidelity metrics");
    cmd_rep->add_option("--run", rep.run_dir, "Run directory produced by estimate");
    cmd_rep->add_option("--real", rep.real_path, "Real dataset CSV");
    cmd_rep->add_option("--synthetic", rep.synth_path, "Synthetic dataset CSV");
    cmd_rep->add_option("--out", rep.out, "Also write the metrics as CSV");
    add_csv_options(cmd_rep, rep.csv);

    CLI11_PARSE(app, argc, argv);

    if (cmd_gen->parsed()) {
        if (gen.kind.empty() && gen.spec_in.empty())
            throw ConfigError("generate-benchmark: --kind or --spec-in is required");
        return cmd_generate(gen);
    }
    if (cmd_train->parsed()) {
        const ObservationalDataset data = load_data(tr.data_path, tr.csv);
        tr.train.config.seed = tr.seed;
        const TrainResult result = train_with_restarts(data, tr.train.config, tr.train.restarts);
        save_model(result.model, tr.model_out);
        if (!tr.log_out.empty()) result.log.write_csv(tr.log_out);
        std::cout << "model written to " << tr.model_out << "\n";
        std::cout << "epochs_run = " << result.log.epochs_run
                  << ", best_epoch = " << result.log.best_epoch
                  << ", best_moment_distance = " << fmt(result.log.best_distance) << "\n";
        return kExitOk;
    }
    if (cmd_syn->parsed()) {
        const GanModel model = load_model(syn.model_path);
        const ObservationalDataset data = synthesize(model, syn.group, syn.n, syn.seed);
        save_csv(data, syn.out);
        std::cout << "wrote " << data.size() << " rows to " << syn.out << "\n";
        return kExitOk;
    }
    if (cmd_est->parsed()) return cmd_estimate(est);
    if (cmd_cmp->parsed()) return cmd_compare(cmp);
    if (cmd_rep->parsed()) {
        if (!rep.run_dir.empty()) {
            std::ifstream in(fs::path(rep.run_dir) / "report.txt");
            if (!in) throw IoError("input not found: " + rep.run_dir + "/report.txt");
            std::cout << in.rdbuf();
            return kExitOk;
        }
        if (rep.real_path.empty() || rep.synth_path.empty())
            throw ConfigError("report: pass --run, or both --real and --synthetic");
        const ObservationalDataset real = load_data(rep.real_path, rep.csv);
        const ObservationalDataset synth = load_data(rep.synth_path, rep.csv);
        const FidelityReport fr = fidelity_report(real, synth);
        std::printf("%-12s %14s %14s\n", "column", "inverted_ks", "kl");
        for (std::size_t j = 0; j < fr.columns.size(); ++j)
            std::printf("%-12s %14s %14s\n", fr.columns[j].c_str(),
                        fmt(fr.inverted_ks_cols[j]).c_str(), fmt(fr.kl_cols[j]).c_str());
        std::printf("%-12s %14s %14s\n", "mean", fmt(fr.inverted_ks_mean).c_str(),
                    fmt(fr.kl_mean).c_str());
        if (!rep.out.empty()) {
            std::ofstream out(rep.out);
            if (!out) throw IoError("cannot open for writing: " + rep.out);
            out << "column,inverted_ks,kl\n";
            for (std::size_t j = 0; j < fr.columns.size(); ++j)
                out << fr.columns[j] << "," << detail::format_double(fr.inverted_ks_cols[j])
                    << "," << detail::format_double(fr.kl_cols[j]) << "\n";
            out << "mean," << detail::format_double(fr.inverted_ks_mean) << ","
                << detail::format_double(fr.kl_mean) << "\n";
        }
        return kExitOk;
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return main_guarded(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
