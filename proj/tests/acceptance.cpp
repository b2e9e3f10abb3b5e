// End-to-end acceptance battery. Runs every criterion at its stated
// tolerance and prints one PASS/FAIL line each; exits nonzero when any
// criterion fails. argv[1] must point at the ganatt CLI binary.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ganatt/ganatt.hpp"

namespace fs = std::filesystem;
using namespace ganatt;

namespace {

struct Outcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<Outcome> g_outcomes;

void record(const std::string& name, bool pass, const std::string& detail) {
    g_outcomes.push_back({name, pass, detail});
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string g_cli;
fs::path g_work;

int run_cli(const std::string& args) {
    const std::string cmd = "\"" + g_cli + "\" " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

int run_cli_capture(const std::string& args, std::string& output) {
    const fs::path tmp = g_work / "cli_capture.txt";
    const std::string cmd = "\"" + g_cli + "\" " + args + " >" + tmp.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    std::ifstream in(tmp);
    output.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return rc;
}

int exit_code(int system_rc) { return WIFEXITED(system_rc) ? WEXITSTATUS(system_rc) : -1; }

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Support accounting (criterion 9, first half) is asserted on every
// pipeline run the battery performs.
std::size_t g_accounting_checked = 0;
bool g_accounting_ok = true;

PipelineResult checked_pipeline(const ObservationalDataset& data, const PipelineConfig& config) {
    PipelineResult r = run_pipeline(data, config);
    ++g_accounting_checked;
    if (r.att.n_used + r.att.n_dropped != data.count_group(1)) g_accounting_ok = false;
    return r;
}

// The canonical nonlinear benchmark draw shipped with the repo; the paper's
// own draw is unpublished, so all nonlinear comparisons use this recorded
// process and its Monte-Carlo truth.
constexpr std::uint64_t kCanonicalDrawSeed = 43;

NonlinearBenchmarkSpec canonical_spec;
GroundTruth canonical_truth;

// ---------------------------------------------------------------------------

void criterion_1_oracle_histogram() {
    const auto t0 = std::chrono::steady_clock::now();
    LinearBenchmarkSpec spec;
    spec.n0 = spec.n1 = 100000;
    spec.seed = 101;
    const ObservationalDataset synth = generate_linear(spec);

    LinearBenchmarkSpec eval = spec;
    eval.seed = 102;
    const Matrix treated = generate_linear(eval).filter_group(1).covariates;

    GridConfig grid;  // auto bin rule, default min_count
    const CateFunction cate = build_grid(synth.filter_group(0), synth.filter_group(1), grid);
    const AttEstimate est = estimate_att(cate, treated);
    const double err = std::abs(est.att - 1.0);
    const double secs = elapsed_s(t0);
    record("criterion 1: oracle-histogram exactness", err <= 0.02 && secs <= 60.0,
           "GAN bypassed, 100k/100k direct draws: |att-1| = " + fmt(err) +
               " (tol 0.02), runtime " + fmt(secs) + "s (limit 60)");
}

void criterion_2_linear_end_to_end() {
    // Desk scale: default GAN config, 3 restarts.
    {
        const auto t0 = std::chrono::steady_clock::now();
        LinearBenchmarkSpec spec;
        spec.n0 = spec.n1 = 10000;
        spec.seed = 201;
        const ObservationalDataset data = generate_linear(spec);
        PipelineConfig config;  // default TrainConfig = default GAN config
        config.restarts = 3;
        config.synth_n = 50000;
        config.seed = 202;
        config.out_dir = (g_work / "c2_desk").string();
        const PipelineResult r = checked_pipeline(data, config);
        const double err = std::abs(r.att.att - 1.0);
        const double mins = elapsed_s(t0) / 60.0;
        record("criterion 2a: linear benchmark, desk scale", err <= 0.08,
               "10k/10k real, 50k/50k synthetic, default config, 3 restarts: |att-1| = " +
                   fmt(err) + " (tol 0.08), " + fmt(mins) + " min (target <= 15)");
    }
    // Full scale: paper sizes.
    {
        LinearBenchmarkSpec spec;
        spec.n0 = spec.n1 = 50000;
        spec.seed = 203;
        const ObservationalDataset data = generate_linear(spec);
        PipelineConfig config;
        config.train.epochs = 40;  // 5x the rows per epoch of the desk run
        config.train.batch_size = 512;
        config.restarts = 2;
        config.synth_n = 200000;
        config.seed = 204;
        config.out_dir = (g_work / "c2_full").string();
        const PipelineResult r = checked_pipeline(data, config);
        const double err = std::abs(r.att.att - 1.0);

        // The 200k-per-group synthetic samples must also track the real
        // group outcome means distributionally.
        const GanModel model = load_model((g_work / "c2_full" / "model.gam").string());
        double worst_gap = 0.0;
        for (int g : {0, 1}) {
            const ObservationalDataset sample =
                synthesize(model, g, 200000, 205 + static_cast<std::uint64_t>(g));
            const double real_mean = mean_of(outcomes_of_group(data, g));
            worst_gap = std::max(worst_gap, std::abs(mean_of(sample.outcomes) - real_mean));
        }
        record("criterion 2b: linear benchmark, full scale",
               err <= 0.05 && worst_gap <= 0.15,
               "50k/50k real, 200k/200k synthetic: |att-1| = " + fmt(err) +
                   " (tol 0.05); worst synthetic-vs-real outcome mean gap " + fmt(worst_gap) +
                   " (tol 0.15)");
    }
}

void criterion_3_nonlinear_end_to_end() {
    canonical_spec = NonlinearBenchmarkSpec::random_draw(kCanonicalDrawSeed);
    canonical_truth = monte_carlo_ground_truth(canonical_spec, 10000000);

    NonlinearBenchmarkSpec spec = canonical_spec;
    spec.n0 = spec.n1 = 20000;
    spec.seed = 301;
    const ObservationalDataset data = generate_nonlinear(spec);

    PipelineConfig config;
    config.train.epochs = 100;
    config.train.gen_hidden = {64, 64};
    config.train.disc_hidden = {64, 64};
    config.train.snapshot_interval = 5;
    config.separate_models = true;
    config.restarts = 2;
    config.synth_n = 100000;
    config.grid.bins_per_dim = {12, 12};
    config.seed = 302;
    config.out_dir = (g_work / "c3_nonlinear").string();
    const PipelineResult r = checked_pipeline(data, config);
    const double rel = std::abs(r.att.att - canonical_truth.att) / canonical_truth.att;
    record("criterion 3: nonlinear benchmark, desk scale", rel <= 0.08,
           "recorded truth " + fmt(canonical_truth.att) + ", att " + fmt(r.att.att) +
               ", relative error " + fmt(rel) + " (tol 0.08)");
}

void criterion_4_insufficient_treated() {
    int wins = 0;
    double max_rel = 0.0;
    std::string detail;
    for (int rep = 0; rep < 5; ++rep) {
        NonlinearBenchmarkSpec spec = canonical_spec;
        spec.n0 = 20000;
        spec.n1 = 1000;
        spec.seed = 43000 + static_cast<std::uint64_t>(rep);
        const ObservationalDataset data = generate_nonlinear(spec);

        const std::vector<double> scores = fit_propensity(data).scores(data);
        const double kern =
            att_from_matches(match_kernel(scores, data, silverman_bandwidth(scores, data)), data)
                .att;

        PipelineConfig config;
        config.train.epochs = 15;  // the augmented treated sample is 100x replicated
        config.train.gen_hidden = {64, 64};
        config.train.disc_hidden = {64, 64};
        config.train.snapshot_interval = 2;
        config.separate_models = true;
        config.control_epochs = 100;
        config.restarts = 2;
        config.synth_n = 100000;
        config.grid.bins_per_dim = {12, 12};
        config.augment_treated_factor = 100;
        config.seed = 9100 + static_cast<std::uint64_t>(rep);
        const PipelineResult r = checked_pipeline(data, config);

        const double gan_err = std::abs(r.att.att - canonical_truth.att);
        const double kern_err = std::abs(kern - canonical_truth.att);
        const double rel = gan_err / canonical_truth.att;
        max_rel = std::max(max_rel, rel);
        if (gan_err <= kern_err) ++wins;
        detail += (rep ? " " : "") + std::string("rep") + std::to_string(rep) + ":" + fmt(rel) +
                  (gan_err <= kern_err ? "(w)" : "(l)");
    }
    record("criterion 4: insufficient-treated regime", max_rel <= 0.10 && wins >= 4,
           "1000 treated x100 augmentation; worst relative error " + fmt(max_rel) +
               " (tol 0.10), beat PSM-Kernel " + std::to_string(wins) + "/5 (need >= 4): " +
               detail);
}

void criterion_5_null_effect() {
    // Zero effect with genuine selection bias: the naive group-mean gap is
    // beta*(mu1-mu0) = 0.3, an order of magnitude beyond every estimator's
    // error band, so ignoring the covariates would fail this check.
    LinearBenchmarkSpec spec;
    spec.gamma = 0.0;
    spec.beta = 0.6;
    spec.mu1 = 0.5;
    spec.sigma_x1 = 1.0;
    spec.sigma_eps = 1.0;
    spec.n0 = 8000;
    spec.n1 = 300;
    spec.seed = 501;
    const ObservationalDataset data = generate_linear(spec);

    PipelineConfig config;
    config.train.epochs = 120;
    config.train.gen_hidden = {64, 64};
    config.train.disc_hidden = {64, 64};
    config.train.snapshot_interval = 4;
    config.separate_models = true;
    config.restarts = 2;
    config.synth_n = 20000;
    config.augment_treated_factor = 27;  // the toolkit's own insufficient-treated recipe
    config.seed = 508;
    const AttEstimate gan = checked_pipeline(data, config).att;

    const std::vector<double> scores = fit_propensity(data).scores(data);
    const AttEstimate nn = att_from_matches(match_nn(scores, data, 3), data);
    const AttEstimate kern =
        att_from_matches(match_kernel(scores, data, silverman_bandwidth(scores, data)), data);
    const AttEstimate cem = att_from_matches(match_cem(data, {}), data);

    std::string detail;
    bool pass = true;
    const struct {
        const char* name;
        const AttEstimate* est;
    } rows[] = {{"gan", &gan}, {"nn", &nn}, {"kernel", &kern}, {"cem", &cem}};
    for (const auto& row : rows) {
        const bool ok = std::abs(row.est->att) <= 3.0 * row.est->std_err;
        pass = pass && ok;
        detail += std::string(row.name) + ": att " + fmt(row.est->att) + " vs 3se " +
                  fmt(3.0 * row.est->std_err) + (ok ? " ok; " : " VIOLATED; ");
    }
    record("criterion 5: null-effect sanity, all four estimators", pass, detail);
}

void criterion_6_gradient_suite() {
    Rng rng(601);
    bool pass = true;
    double worst = 0.0;
    const std::vector<std::vector<std::size_t>> shapes = {{2, 4}, {3, 6, 2}, {4, 8, 8, 1}};
    for (const auto& dims : shapes) {
        for (auto hidden : {HiddenActivation::Relu, HiddenActivation::Tanh}) {
            for (auto output : {OutputActivation::Linear, OutputActivation::Sigmoid}) {
                FeedforwardNet net(dims, hidden, output);
                net.init_glorot(rng);
                Matrix in(3, dims.front());
                for (std::size_t i = 0; i < in.size(); ++i) in.data()[i] = rng.normal() + 0.1;
                Matrix weight(3, dims.back());
                for (std::size_t i = 0; i < weight.size(); ++i) weight.data()[i] = rng.normal();

                const NetGradients grads = backward(net, in, weight);
                auto loss = [&](const FeedforwardNet& n) {
                    const Matrix out = forward(n, in);
                    double l = 0.0;
                    for (std::size_t i = 0; i < out.size(); ++i)
                        l += weight.data()[i] * out.data()[i];
                    return l;
                };
                const double h = 1e-5;
                for (std::size_t l = 0; l < net.num_layers(); ++l) {
                    for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
                        FeedforwardNet up = net;
                        FeedforwardNet down = net;
                        up.weights[l].data()[i] += h;
                        down.weights[l].data()[i] -= h;
                        const double fd = (loss(up) - loss(down)) / (2.0 * h);
                        const double an = grads.weights[l].data()[i];
                        const double rel =
                            std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-3});
                        worst = std::max(worst, rel);
                        if (rel >= 1e-4) pass = false;
                    }
                }
            }
        }
    }
    record("criterion 6: finite-difference gradient suite", pass,
           "worst relative deviation " + fmt(worst) + " (tol 1e-4)");
}

void criterion_7_metric_oracles() {
    Rng rng(701);
    std::vector<double> x(5000);
    for (auto& v : x) v = rng.normal();
    const bool self_ok = inverted_ks(x, x) == 1.0;

    std::vector<double> real(100000), synth(100000);
    for (auto& v : real) v = rng.normal();
    for (auto& v : synth) v = rng.normal(1.0, 1.0);
    const double kl = continuous_kl(real, synth, 100);
    const bool kl_ok = std::abs(kl - 0.5) <= 0.1;
    record("criterion 7: metric oracles", self_ok && kl_ok,
           std::string("inverted_ks(x,x) == 1 exactly: ") + (self_ok ? "yes" : "NO") +
               "; KL(N(1,1)||N(0,1)) = " + fmt(kl) + " vs analytic 0.5 (tol 0.1)");
}

void criterion_8_cli_determinism() {
    const fs::path data_csv = g_work / "c8_data.csv";
    const fs::path run_a = g_work / "c8_run_a";
    const fs::path run_b = g_work / "c8_run_b";
    int rc = run_cli("generate-benchmark --kind linear --out " + data_csv.string() +
                     " --n0 2000 --n1 2000 --seed 801");
    bool pass = rc == 0;
    const std::string flags =
        " --seed 42 --epochs 8 --batch-size 128 --gen-hidden 32 32 --disc-hidden 32 32"
        " --snapshot-interval 4 --synth-n 5000";
    if (pass)
        pass = run_cli("estimate --data " + data_csv.string() + " --out-dir " + run_a.string() +
                       flags) == 0;
    if (pass)
        pass = run_cli("estimate --data " + data_csv.string() + " --out-dir " + run_b.string() +
                       flags) == 0;
    std::string detail = "estimate --seed 42 run twice";
    if (pass) {
        const std::string rep_a = read_file(run_a / "report.txt");
        const std::string rep_b = read_file(run_b / "report.txt");
        pass = !rep_a.empty() && rep_a == rep_b;
        detail += pass ? ": byte-identical run reports" : ": reports DIFFER";
    } else {
        detail += ": CLI invocation failed";
    }
    record("criterion 8: seeded determinism through the CLI", pass, detail);
}

void criterion_9_support_accounting() {
    // Reuse the desk-scale model from criterion 2a and double synth_n.
    const fs::path model_path = g_work / "c2_desk" / "model.gam";
    bool pass = fs::exists(model_path);
    std::string detail;
    if (!pass) {
        detail = "desk-scale model artifact missing";
    } else {
        const GanModel model = load_model(model_path.string());
        LinearBenchmarkSpec spec;
        spec.n0 = spec.n1 = 10000;
        spec.seed = 201;
        const Matrix treated = generate_linear(spec).filter_group(1).covariates;

        const std::size_t base_n = 50000;
        GridConfig grid;
        grid.bins_per_dim = {auto_bins(2 * base_n, 1)};  // hold the cube size fixed
        const ObservationalDataset s0 = synthesize(model, 0, base_n, 901);
        const ObservationalDataset s1 = synthesize(model, 1, base_n, 902);
        const AttEstimate small = estimate_att(build_grid(s0, s1, grid), treated);

        const ObservationalDataset d0 = synthesize(model, 0, 2 * base_n, 903);
        const ObservationalDataset d1 = synthesize(model, 1, 2 * base_n, 904);
        const AttEstimate big = estimate_att(build_grid(d0, d1, grid), treated);

        const double n1 = static_cast<double>(treated.rows());
        const bool identity_ok = small.n_used + small.n_dropped == treated.rows() &&
                                 big.n_used + big.n_dropped == treated.rows() &&
                                 g_accounting_ok;
        const bool growth_ok = static_cast<double>(big.n_dropped) <=
                               static_cast<double>(small.n_dropped) + 0.01 * n1;
        pass = identity_ok && growth_ok;
        detail = "n_used+n_dropped == n1 on " + std::to_string(g_accounting_checked + 2) +
                 " runs: " + (identity_ok ? "yes" : "NO") + "; dropped " +
                 std::to_string(small.n_dropped) + " -> " + std::to_string(big.n_dropped) +
                 " when synth_n doubles (allowed +" + fmt(0.01 * n1) + ")";
    }
    record("criterion 9: support accounting", pass, detail);
}

void cli_contract() {
    std::string out;
    bool pass = true;
    std::string detail;

    int rc = exit_code(run_cli_capture("estimate --data /nonexistent/nowhere.csv", out));
    const bool missing_ok = rc == 2 && out.find("input not found") != std::string::npos;
    pass = pass && missing_ok;
    detail += std::string("missing input -> exit 2 + message: ") + (missing_ok ? "ok" : "NO");

    rc = exit_code(run_cli_capture("synthesize --model nowhere.gam --n 0 --out x.csv", out));
    const bool usage_ok = rc == 1 || rc == 2;  // n=0 is usage; missing model is data
    pass = pass && usage_ok;
    detail += std::string("; bad synthesize args -> nonzero exit: ") + (usage_ok ? "ok" : "NO");

    rc = exit_code(run_cli_capture(
        "generate-benchmark --kind nonlinear --out " + (g_work / "bad.csv").string() + " --n0 0",
        out));
    const bool gen_ok = rc == 1;
    pass = pass && gen_ok;
    detail += std::string("; nonlinear n0=0 -> usage exit 1: ") + (gen_ok ? "ok" : "NO");

    rc = exit_code(run_cli_capture("--help", out));
    const bool help_ok = rc == 0 && out.find("generate-benchmark") != std::string::npos;
    pass = pass && help_ok;
    detail += std::string("; --help lists subcommands: ") + (help_ok ? "ok" : "NO");

    record("cli contract: exit codes and messages", pass, detail);
}

void cli_benchmark_and_compare() {
    bool pass = true;
    std::string detail;

    // Default linear benchmark: 50k per group and a recorded truth of 1.
    const fs::path big_csv = g_work / "lin_default.csv";
    int rc = exit_code(
        run_cli("generate-benchmark --kind linear --out " + big_csv.string() + " --seed 810"));
    std::size_t lines = 0;
    {
        std::ifstream in(big_csv);
        std::string line;
        while (std::getline(in, line)) ++lines;
    }
    const std::string spec_text = read_file(big_csv.string() + ".spec");
    const bool gen_ok = rc == 0 && lines == 100001 &&
                        spec_text.find("att_truth = 1") != std::string::npos;
    pass = pass && gen_ok;
    detail += std::string("default linear: 100k rows + truth record: ") + (gen_ok ? "ok" : "NO");

    // Same seed, same bytes.
    const fs::path a_csv = g_work / "det_a.csv";
    const fs::path b_csv = g_work / "det_b.csv";
    run_cli("generate-benchmark --kind nonlinear --out " + a_csv.string() +
            " --n0 500 --n1 500 --seed 811 --draw-seed 43 --mc-draws 1000000");
    run_cli("generate-benchmark --kind nonlinear --out " + b_csv.string() +
            " --n0 500 --n1 500 --seed 811 --draw-seed 43 --mc-draws 1000000");
    const bool det_ok = !read_file(a_csv).empty() && read_file(a_csv) == read_file(b_csv) &&
                        read_file(a_csv.string() + ".spec") == read_file(b_csv.string() + ".spec");
    pass = pass && det_ok;
    detail += std::string("; same-seed byte-identical outputs: ") + (det_ok ? "ok" : "NO");

    // compare: the text table and comparison.csv must agree.
    const fs::path cmp_csv = g_work / "cmp_data.csv";
    run_cli("generate-benchmark --kind linear --out " + cmp_csv.string() +
            " --gamma 0 --mu1 0.5 --sigma-x1 1 --sigma-eps 1 --n0 4000 --n1 400 --seed 812");
    const fs::path cmp_dir = g_work / "cmp_run";
    std::string table;
    rc = exit_code(run_cli_capture(
        "compare --data " + cmp_csv.string() + " --out-dir " + cmp_dir.string() +
            " --seed 813 --epochs 10 --batch-size 128 --gen-hidden 32 32 --disc-hidden 32 32"
            " --snapshot-interval 5 --synth-n 20000",
        table));
    bool cmp_ok = rc == 0;
    std::size_t rows_matched = 0;
    if (cmp_ok) {
        std::ifstream in(cmp_dir / "comparison.csv");
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string name, status, att_str;
            std::getline(ss, name, ',');
            std::getline(ss, status, ',');
            std::getline(ss, att_str, ',');
            if (status != "ok") continue;
            const double att_csv = std::stod(att_str);
            // Find the same estimator's row in the text table.
            const auto pos = table.find("\n" + name);
            if (pos == std::string::npos) {
                cmp_ok = false;
                break;
            }
            std::stringstream row(table.substr(pos + 1 + name.size()));
            double att_table;
            row >> att_table;
            if (std::abs(att_table - att_csv) >
                1e-5 * std::max(1.0, std::abs(att_csv))) {
                cmp_ok = false;
                break;
            }
            ++rows_matched;
        }
        cmp_ok = cmp_ok && rows_matched == 4;
    }
    pass = pass && cmp_ok;
    detail += "; compare table matches CSV on " + std::to_string(rows_matched) + "/4 rows";

    record("cli benchmarks and comparison round-trip", pass, detail);
}

void stress_smoke_10d() {
    // Firm-data-scale stand-in: 10-D covariates, 1250 treated / 240k control,
    // driven end to end through CSV and the CLI.
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(1001);
    const std::size_t n0 = 240000, n1 = 1250, q = 10;
    ObservationalDataset data;
    for (std::size_t j = 0; j < q; ++j) data.column_names.push_back("x" + std::to_string(j + 1));
    data.covariates = Matrix(n0 + n1, q);
    data.outcomes.reserve(n0 + n1);
    data.treatment.reserve(n0 + n1);
    std::vector<double> beta(q);
    for (auto& b : beta) b = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < n0 + n1; ++i) {
        const int d = i < n0 ? 0 : 1;
        double y = 0.5 * d + rng.normal(0.0, 0.5);
        for (std::size_t j = 0; j < q; ++j) {
            const double x = rng.normal(d ? 0.3 : 0.0, 1.0);
            data.covariates(i, j) = x;
            y += beta[j] * x;
        }
        data.outcomes.push_back(y);
        data.treatment.push_back(d);
    }
    const fs::path csv = g_work / "stress10d.csv";
    save_csv(data, csv.string());

    const fs::path out_dir = g_work / "stress10d_run";
    const int rc = run_cli(
        "estimate --data " + csv.string() + " --out-dir " + out_dir.string() +
        " --seed 77 --epochs 2 --batch-size 512 --gen-hidden 64 64 --disc-hidden 64 64"
        " --snapshot-interval 1 --synth-n 200000 --augment-factor 100 --separate-models"
        " --control-epochs 2 --restarts 1");
    const bool report_ok = fs::exists(out_dir / "report.txt");
    const double mins = elapsed_s(t0) / 60.0;
    record("stress smoke: 10-D CSV ingestion + pipeline", rc == 0 && report_ok,
           "1250 treated / 240k control, exit code " + std::to_string(rc) + ", report " +
               (report_ok ? "written" : "MISSING") + ", " + fmt(mins) + " min");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path-to-ganatt-cli>\n");
        return 2;
    }
    g_cli = argv[1];
    g_work = fs::temp_directory_path() / "ganatt_acceptance";
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    criterion_1_oracle_histogram();
    criterion_2_linear_end_to_end();
    criterion_3_nonlinear_end_to_end();
    criterion_4_insufficient_treated();
    criterion_5_null_effect();
    criterion_6_gradient_suite();
    criterion_7_metric_oracles();
    criterion_8_cli_determinism();
    criterion_9_support_accounting();
    cli_contract();
    cli_benchmark_and_compare();
    stress_smoke_10d();

    std::size_t failed = 0;
    for (const auto& o : g_outcomes)
        if (!o.pass) ++failed;
    std::printf("\n%zu/%zu acceptance checks passed\n", g_outcomes.size() - failed,
                g_outcomes.size());
    return failed == 0 ? 0 : 1;
}
