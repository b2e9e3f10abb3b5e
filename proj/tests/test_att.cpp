#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ganatt/att.hpp"
#include "ganatt/benchmark.hpp"

#include <filesystem>
#include <fstream>

using namespace ganatt;

namespace {

ObservationalDataset make_1d(std::initializer_list<std::pair<double, double>> xy, int group) {
    ObservationalDataset d;
    d.column_names = {"x1"};
    d.covariates = Matrix(xy.size(), 1);
    std::size_t i = 0;
    for (const auto& [x, y] : xy) {
        d.covariates(i, 0) = x;
        d.outcomes.push_back(y);
        d.treatment.push_back(group);
        ++i;
    }
    return d;
}

CateFunction two_bin_surface() {
    const auto g0 = make_1d({{0.1, 1.0}, {0.9, 3.0}}, 0);
    const auto g1 = make_1d({{0.2, 2.0}, {0.8, 5.0}}, 1);
    GridConfig config;
    config.bins_per_dim = {2};
    config.min_count = 1;
    return build_grid(g0, g1, config);
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("estimate_att: hand example averages the cube values") {
    const CateFunction cate = two_bin_surface();
    Matrix treated(3, 1);
    treated(0, 0) = 0.1;
    treated(1, 0) = 0.2;
    treated(2, 0) = 0.9;
    const AttEstimate est = estimate_att(cate, treated);
    CHECK(est.att == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(est.n_used == 3);
    CHECK(est.n_dropped == 0);
    CHECK(est.per_sample_cates == std::vector<double>{1.0, 1.0, 2.0});
}

TEST_CASE("estimate_att: constant surface has zero standard error") {
    const auto g0 = make_1d({{0.1, 1.0}, {0.9, 1.0}}, 0);
    const auto g1 = make_1d({{0.1, 3.5}, {0.9, 3.5}}, 1);
    GridConfig config;
    config.bins_per_dim = {2};
    config.min_count = 1;
    const CateFunction cate = build_grid(g0, g1, config);
    Matrix treated(4, 1);
    treated(0, 0) = 0.1;
    treated(1, 0) = 0.2;
    treated(2, 0) = 0.8;
    treated(3, 0) = 0.9;
    const AttEstimate est = estimate_att(cate, treated);
    CHECK(est.att == doctest::Approx(2.5));
    CHECK(est.std_err == 0.0);
}

TEST_CASE("estimate_att: dropped samples are counted, not imputed") {
    const CateFunction cate = two_bin_surface();
    Matrix treated(3, 1);
    treated(0, 0) = 0.1;
    treated(1, 0) = 55.0;  // out of bounds
    treated(2, 0) = 0.9;
    const AttEstimate est = estimate_att(cate, treated);
    CHECK(est.n_used == 2);
    CHECK(est.n_dropped == 1);
    CHECK(est.att == doctest::Approx(1.5));
    CHECK(est.n_used + est.n_dropped == treated.rows());
}

TEST_CASE("estimate_att: dimension mismatch and empty support raise") {
    const CateFunction cate = two_bin_surface();
    CHECK_THROWS_AS(estimate_att(cate, Matrix(2, 3, 0.0)), ShapeError);
    Matrix far(2, 1, 99.0);
    CHECK_THROWS_AS(estimate_att(cate, far), EstimationError);
}

TEST_CASE("oracle pipeline: direct sampling recovers gamma within the reported error") {
    // The generator is bypassed: both synthetic groups are drawn from the
    // true process, isolating the cube estimator and the ensemble average.
    LinearBenchmarkSpec synth_spec;
    synth_spec.n0 = synth_spec.n1 = 200000;
    synth_spec.seed = 404;
    const ObservationalDataset synth = generate_linear(synth_spec);

    LinearBenchmarkSpec eval_spec = synth_spec;
    eval_spec.n0 = 1;
    eval_spec.n1 = 500;
    eval_spec.seed = 405;
    const Matrix treated = generate_linear(eval_spec).filter_group(1).covariates;

    GridConfig config;
    config.bins_per_dim = {350};
    const CateFunction cate =
        build_grid(synth.filter_group(0), synth.filter_group(1), config);
    const AttEstimate est = estimate_att(cate, treated);
    CHECK(std::abs(est.att - synth_spec.gamma) <= 3.0 * est.std_err);
    CHECK(est.n_used + est.n_dropped == 500);
}

TEST_CASE("piecewise constancy: perturbing a covariate within its cube changes nothing") {
    LinearBenchmarkSpec spec;
    spec.n0 = spec.n1 = 20000;
    spec.seed = 77;
    const ObservationalDataset synth = generate_linear(spec);
    GridConfig config;
    config.bins_per_dim = {32};
    const CateFunction cate =
        build_grid(synth.filter_group(0), synth.filter_group(1), config);
    const CubeGrid& grid = cate.grid();
    const double width = (grid.upper()[0] - grid.lower()[0]) / 32.0;

    Rng rng(78);
    std::size_t tested = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const double x = rng.normal(1.0, 2.0);
        const auto base = cate.evaluate({x});
        if (!base) continue;
        const auto key = grid.locate(&x);
        const double lo = grid.lower()[0] + static_cast<double>(grid.unpack(*key)[0]) * width;
        // Nudge anywhere inside the same cube.
        const double x2 = lo + rng.uniform(1e-9, width * (1.0 - 1e-9));
        const auto moved = cate.evaluate({x2});
        REQUIRE(moved.has_value());
        CHECK(*moved == *base);
        ++tested;
    }
    CHECK(tested > 100);
}

TEST_CASE("support accounting: larger synthetic samples do not lose support") {
    LinearBenchmarkSpec spec;
    spec.n0 = spec.n1 = 20000;
    spec.seed = 88;
    const ObservationalDataset small = generate_linear(spec);
    LinearBenchmarkSpec big_spec = spec;
    big_spec.n0 = big_spec.n1 = 40000;
    big_spec.seed = 89;
    const ObservationalDataset big = generate_linear(big_spec);

    LinearBenchmarkSpec eval_spec = spec;
    eval_spec.n0 = 1;
    eval_spec.n1 = 5000;
    eval_spec.seed = 90;
    const Matrix treated = generate_linear(eval_spec).filter_group(1).covariates;

    GridConfig config;
    config.bins_per_dim = {64};
    const AttEstimate est_small =
        estimate_att(build_grid(small.filter_group(0), small.filter_group(1), config), treated);
    const AttEstimate est_big =
        estimate_att(build_grid(big.filter_group(0), big.filter_group(1), config), treated);
    CHECK(est_small.n_used + est_small.n_dropped == 5000);
    CHECK(est_big.n_used + est_big.n_dropped == 5000);
    const double n1 = 5000.0;
    CHECK(static_cast<double>(est_big.n_dropped) <=
          static_cast<double>(est_small.n_dropped) + 0.01 * n1);
}

TEST_CASE("run_pipeline: tiny end-to-end run with deterministic artifacts") {
    LinearBenchmarkSpec spec;
    spec.n0 = spec.n1 = 600;
    spec.seed = 42;
    const ObservationalDataset data = generate_linear(spec);

    PipelineConfig config;
    config.train.epochs = 3;
    config.train.batch_size = 128;
    config.train.gen_hidden = {32, 32};
    config.train.disc_hidden = {32, 32};
    config.train.snapshot_interval = 2;
    config.synth_n = 3000;
    config.seed = 42;
    const auto dir =
        std::filesystem::temp_directory_path() / "ganatt_pipeline_test";
    std::filesystem::remove_all(dir);
    config.out_dir = dir.string();

    const PipelineResult first = run_pipeline(data, config);
    CHECK(first.att.n_used + first.att.n_dropped == 600);
    CHECK(first.report_text.find("[estimate]") != std::string::npos);
    for (const char* name : {"model.gam", "synthetic0.csv", "synthetic1.csv",
                             "cate_surface.csv", "training_log.csv", "report.txt"})
        CHECK(std::filesystem::exists(dir / name));
    CHECK(read_file(dir / "report.txt") == first.report_text);

    // Same seed, same bytes.
    const PipelineResult second = run_pipeline(data, config);
    CHECK(second.report_text == first.report_text);
    CHECK(second.att.att == first.att.att);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_pipeline: failures carry the stage name") {
    LinearBenchmarkSpec spec;
    spec.n0 = spec.n1 = 100;
    const ObservationalDataset data = generate_linear(spec);

    PipelineConfig config;
    config.train.epochs = 0;
    config.train.batch_size = 64;
    config.synth_n = 0;
    CHECK_THROWS_AS(run_pipeline(data, config), ConfigError);

    // A constant outcome with discrete handling disabled fails inside train.
    ObservationalDataset flat = data;
    for (auto& y : flat.outcomes) y = 1.0;
    PipelineConfig config2;
    config2.train.epochs = 1;
    config2.train.batch_size = 64;
    config2.train.discrete_max_levels = 0;
    config2.synth_n = 100;
    try {
        run_pipeline(flat, config2);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(std::string(e.what()).find("stage train") != std::string::npos);
        CHECK(std::string(e.what()).find("degenerate") != std::string::npos);
    }

    const ObservationalDataset only_control = data.filter_group(0);
    PipelineConfig config3;
    CHECK_THROWS_AS(run_pipeline(only_control, config3), DataError);
}
