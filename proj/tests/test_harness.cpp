// SPDX-License-Identifier: Apache-2.0
//
// mvlink - multi-vehicular hybrid MIMO link-level simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <string>

#include <unistd.h>

#include "mvlink/beam_alignment.hpp"
#include "mvlink/channel.hpp"
#include "mvlink/config.hpp"
#include "mvlink/persistence.hpp"
#include "mvlink/rng.hpp"
#include "mvlink/sweep.hpp"

namespace
{

using namespace mvlink;
using Catch::Approx;

ExperimentConfig small_config()
{
    ExperimentConfig cfg = default_config();
    cfg.tx = UraGeometry{4, 2, 0.5};
    cfg.rx = UraGeometry{4, 2, 0.5};
    cfg.rf_pairs = {RfPair{2, 4}};
    cfg.snr_db = {0.0};
    cfg.passages = {40};
    cfg.trials = 24;
    cfg.n_fits = 2;
    cfg.master_seed = 424242;
    return cfg;
}

std::string temp_path(const std::string& stem)
{
    return "/tmp/mvlink_" + stem + "_" + std::to_string(::getpid()) + ".bin";
}

arma::cx_mat random_cx_mat(std::mt19937_64& rng, arma::uword n_rows, arma::uword n_cols)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    arma::cx_mat out(n_rows, n_cols);
    for (arma::uword c = 0; c < n_cols; ++c)
    {
        for (arma::uword r = 0; r < n_rows; ++r)
        {
            out(r, c) = std::complex<double>(normal(rng), normal(rng));
        }
    }
    return out;
}

} // namespace

TEST_CASE("config JSON round-trips and rejects malformed input", "[harness]")
{
    SECTION("defaults validate and round-trip")
    {
        const ExperimentConfig cfg = default_config();
        REQUIRE_NOTHROW(cfg.validate());
        const ExperimentConfig back = config_from_json_text(config_to_json(cfg));
        REQUIRE(back.preset == cfg.preset);
        REQUIRE(back.tx.n_az == cfg.tx.n_az);
        REQUIRE(back.rx.total() == cfg.rx.total());
        REQUIRE(back.snr_db == cfg.snr_db);
        REQUIRE(back.trials == cfg.trials);
        REQUIRE(back.master_seed == cfg.master_seed);
        REQUIRE(config_fingerprint(back) == config_fingerprint(cfg));
    }

    SECTION("custom environments round-trip through JSON")
    {
        ExperimentConfig cfg = small_config();
        cfg.preset = "custom";
        cfg.env.reflectors.push_back({12.0, -3.0, 4.0});
        cfg.region.center = {25.0, 1.0, 1.5};
        const ExperimentConfig back = config_from_json_text(config_to_json(cfg));
        REQUIRE(back.env.reflectors.size() == cfg.env.reflectors.size());
        REQUIRE(back.region.center(0) == Approx(25.0));
        REQUIRE(config_fingerprint(back) == config_fingerprint(cfg));
    }

    SECTION("unknown keys are named in the error")
    {
        try
        {
            config_from_json_text(R"({"trails": 10})");
            FAIL("expected invalid_argument");
        }
        catch (const std::invalid_argument& err)
        {
            REQUIRE(std::string(err.what()).find("trails") != std::string::npos);
        }
    }

    SECTION("structural violations throw")
    {
        REQUIRE_THROWS_AS(config_from_json_text(R"({"preset": "s9"})"), std::invalid_argument);
        REQUIRE_THROWS_AS(config_from_json_text(R"({"grid": {"snr_db": []}})").validate(),
                          std::invalid_argument);
        ExperimentConfig cfg = small_config();
        cfg.trials = 0;
        REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = small_config();
        cfg.rank_threshold = 1.5;
        REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    }

    SECTION("infeasible architecture combinations are rejected up front")
    {
        // Sub-connected with as many chains as antennas: one-element
        // sub-arrays cannot offer a codebook per chain.
        ExperimentConfig cfg = small_config();
        cfg.architectures = {Architecture::SubConnected};
        cfg.rf_pairs = {RfPair{8, 8}};
        REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);

        // Subspace fitting on a full-digital problem beyond the cap.
        cfg = small_config();
        cfg.tx = UraGeometry{16, 8, 0.5};
        cfg.rx = UraGeometry{16, 8, 0.5};
        cfg.architectures = {Architecture::FullDigital};
        REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg.estimators = {EstimatorKind::Uml, EstimatorKind::PerfectCsi};
        REQUIRE_NOTHROW(cfg.validate());
    }

    SECTION("fingerprint tracks structure, not runtime knobs")
    {
        const ExperimentConfig base = small_config();
        ExperimentConfig changed = base;
        changed.trials = 999;
        changed.threads = 8;
        changed.out_path = "elsewhere.csv";
        changed.master_seed = 1;
        changed.estimators = {EstimatorKind::Uml};
        REQUIRE(config_fingerprint(changed) == config_fingerprint(base));

        changed = base;
        changed.snr_db = {-5.0};
        REQUIRE(config_fingerprint(changed) != config_fingerprint(base));

        changed = base;
        changed.region.radius = 7.0;
        REQUIRE(config_fingerprint(changed) != config_fingerprint(base));
    }
}

TEST_CASE("grid expansion enumerates nested sweep axes in order", "[harness]")
{
    ExperimentConfig cfg = small_config();
    cfg.architectures = {Architecture::FullyConnected, Architecture::SubConnected};
    cfg.snr_db = {-10.0, 0.0};
    cfg.passages = {10, 20};
    cfg.radii_m = {1.0, 2.0};

    const std::vector<GridPoint> grid = expand_grid(cfg);
    REQUIRE(grid.size() == 16);
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        REQUIRE(grid[i].index == i);
    }
    // Innermost axis: radius. Then passages, then SNR, then architecture.
    REQUIRE(grid[0].radius_m == 1.0);
    REQUIRE(grid[1].radius_m == 2.0);
    REQUIRE(grid[0].passages == 10);
    REQUIRE(grid[2].passages == 20);
    REQUIRE(grid[0].snr_db == -10.0);
    REQUIRE(grid[4].snr_db == 0.0);
    REQUIRE(grid[0].arch == Architecture::FullyConnected);
    REQUIRE(grid[8].arch == Architecture::SubConnected);
}

TEST_CASE("sweep emits a complete, finite, deterministic table", "[harness]")
{
    ExperimentConfig cfg = small_config();
    cfg.snr_db = {0.0, 10.0};

    const SweepResult result = run_sweep(cfg);
    REQUIRE(result.rows.size() == 2 * cfg.estimators.size());

    for (const SweepRow& row : result.rows)
    {
        REQUIRE(std::isfinite(row.se_mean));
        REQUIRE(std::isfinite(row.se_stderr));
        REQUIRE(std::isfinite(row.mse_mean));
        REQUIRE(std::isfinite(row.mse_stderr));
        REQUIRE(std::isfinite(row.crlb));
        REQUIRE(std::isfinite(row.mse_bound));
        REQUIRE(row.trials == cfg.trials);
        if (row.estimator == EstimatorKind::Uml)
        {
            REQUIRE(row.r_hat_mode == row.n_tx_rf * row.n_rx_rf);
            REQUIRE(row.mse_bound == Approx(row.crlb));
        }
        if (row.estimator == EstimatorKind::PerfectCsi)
        {
            REQUIRE(row.mse_mean == 0.0);
            REQUIRE(row.mse_bound == 0.0);
            REQUIRE(row.r_hat_mode == 0);
        }
    }

    const std::string csv = csv_string(result);
    REQUIRE(csv.find("nan") == std::string::npos);
    REQUIRE(csv.find("inf") == std::string::npos);

    SECTION("byte-identical across reruns and thread counts")
    {
        REQUIRE(csv_string(run_sweep(cfg)) == csv);
        ExperimentConfig threaded = cfg;
        threaded.threads = 3;
        REQUIRE(csv_string(run_sweep(threaded)) == csv);
    }
}

TEST_CASE("CSV format follows the documented shape", "[harness]")
{
    ExperimentConfig cfg = small_config();
    cfg.estimators = {EstimatorKind::Uml, EstimatorKind::PerfectCsi};
    cfg.trials = 5;
    const std::string csv = csv_string(run_sweep(cfg));

    REQUIRE(csv.rfind("snr_db,passages,n_tx_rf,n_rx_rf,radius_m,architecture,estimator,"
                      "se_mean,se_stderr,mse_mean,mse_stderr,crlb,mse_bound,r_hat_mode,"
                      "trials,seed\r\n",
                      0) == 0);

    std::size_t lines = 0;
    std::size_t pos = 0;
    while ((pos = csv.find("\r\n", pos)) != std::string::npos)
    {
        ++lines;
        pos += 2;
    }
    REQUIRE(lines == 1 + 2); // header + one row per estimator
    REQUIRE(csv.back() == '\n');

    // 16 columns → 15 commas per row.
    std::istringstream stream(csv);
    std::string line;
    while (std::getline(stream, line))
    {
        if (line.empty())
        {
            continue;
        }
        REQUIRE(std::count(line.begin(), line.end(), ',') == 15);
    }
}

TEST_CASE("standard errors shrink with the trial budget", "[harness]")
{
    ExperimentConfig cfg = small_config();
    cfg.estimators = {EstimatorKind::Uml};
    cfg.passages = {1};
    cfg.n_fits = 1;
    cfg.trials = 80;
    const SweepRow narrow = run_sweep(cfg).rows.front();

    cfg.trials = 320;
    const SweepRow wide = run_sweep(cfg).rows.front();

    REQUIRE(narrow.se_stderr > 0.0);
    REQUIRE(wide.se_stderr > 0.0);
    const double ratio = narrow.mse_stderr / wide.mse_stderr;
    // Quadrupling the trials should halve the standard error (1/sqrt(T)).
    REQUIRE(ratio > 1.4);
    REQUIRE(ratio < 2.9);
    const double se_ratio = narrow.se_stderr / wide.se_stderr;
    REQUIRE(se_ratio > 1.4);
    REQUIRE(se_ratio < 2.9);
}

TEST_CASE("single on-grid passage reproduces the closed-form rate", "[harness]")
{
    // Full-digital genie row over the line-of-sight preset with one trial:
    // the rank-one channel makes the rate log2(1 + s1^2 / sigma_n^2), which
    // the test replays from the documented seed ladder.
    ExperimentConfig cfg = default_config();
    const ScenarioPreset preset = scenario_preset("s2");
    cfg.preset = "s2";
    cfg.env = preset.env;
    cfg.region = preset.region;
    cfg.tx = UraGeometry{4, 2, 0.5};
    cfg.rx = UraGeometry{4, 2, 0.5};
    cfg.architectures = {Architecture::FullDigital};
    cfg.estimators = {EstimatorKind::PerfectCsi};
    cfg.snr_db = {3.0};
    cfg.passages = {1};
    cfg.trials = 1;
    cfg.n_fits = 1;
    cfg.master_seed = 20240917;

    const SweepRow row = run_sweep(cfg).rows.front();

    auto rng = make_rng(cfg.master_seed, stream::evaluation, 0, 1);
    const PathSource source = scenario_path_source(cfg.env, cfg.region, cfg.angle_mode);
    const PathSet paths = source(rng);
    REQUIRE(paths.count() == 1);
    const arma::cx_vec amps = draw_amplitudes(paths, rng);
    const arma::cx_mat H = assemble_channel(paths, amps, cfg.tx, cfg.rx);
    const double s1 = arma::norm(H, "fro"); // rank one: top singular value
    const double sigma_n_sq = std::pow(10.0, -cfg.snr_db.front() / 10.0);
    const double expected = std::log2(1.0 + s1 * s1 / sigma_n_sq);

    REQUIRE(row.se_mean == Approx(expected).epsilon(1e-9));
    REQUIRE(row.mse_mean == 0.0);
}

TEST_CASE("artifacts round-trip bit-exactly and refuse corruption", "[harness]")
{
    auto rng = make_rng(31, 7);
    std::vector<NamedMatrix> blocks;
    blocks.push_back({"alpha", random_cx_mat(rng, 5, 3)});
    blocks.push_back({"beta/0", random_cx_mat(rng, 1, 1)});
    blocks.push_back({"gamma", random_cx_mat(rng, 2, 8)});

    const std::string path = temp_path("artifact");
    save_artifact(path, 0xDEADBEEFULL, 42, blocks);

    SECTION("round trip is exact")
    {
        const ArtifactFile file = load_artifact(path);
        REQUIRE(file.version == artifact_format_version);
        REQUIRE(file.config_hash == 0xDEADBEEFULL);
        REQUIRE(file.seed == 42);
        REQUIRE(file.blocks.size() == 3);
        for (std::size_t i = 0; i < blocks.size(); ++i)
        {
            REQUIRE(file.blocks[i].name == blocks[i].name);
            REQUIRE(arma::all(arma::vectorise(file.blocks[i].value == blocks[i].value)));
        }
        REQUIRE(file.contains("beta/0"));
        REQUIRE_FALSE(file.contains("delta"));
        REQUIRE_THROWS_AS(file.find("delta"), std::runtime_error);
    }

    SECTION("hash checking")
    {
        REQUIRE_NOTHROW(load_artifact_checked(path, 0xDEADBEEFULL));
        REQUIRE_THROWS_AS(load_artifact_checked(path, 0x1234ULL), std::invalid_argument);
    }

    SECTION("corrupted magic is refused")
    {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(0);
        f.put('X');
        f.close();
        REQUIRE_THROWS_AS(load_artifact(path), std::runtime_error);
    }

    SECTION("unsupported version is refused")
    {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(8);
        const std::uint32_t bad = 999;
        f.write(reinterpret_cast<const char*>(&bad), sizeof(bad));
        f.close();
        REQUIRE_THROWS_AS(load_artifact(path), std::runtime_error);
    }

    SECTION("truncation is refused")
    {
        std::ifstream in(path, std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        in.close();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size() / 2));
        out.close();
        REQUIRE_THROWS_AS(load_artifact(path), std::runtime_error);
    }

    std::remove(path.c_str());
}

TEST_CASE("staged stages reproduce the in-memory sweep", "[harness]")
{
    ExperimentConfig cfg = small_config();
    const std::string beams = temp_path("beams");
    const std::string models = temp_path("models");

    run_align_stage(cfg, beams);
    run_fit_stage(cfg, beams, models);
    const SweepResult staged = run_evaluate_stage(cfg, beams, models);
    const SweepResult direct = run_sweep(cfg);
    REQUIRE(csv_string(staged) == csv_string(direct));

    SECTION("stage artifacts refuse a structurally different run")
    {
        ExperimentConfig other = cfg;
        other.snr_db = {-20.0};
        REQUIRE_THROWS_AS(run_fit_stage(other, beams, models), std::invalid_argument);
    }

    SECTION("staged verbs require singleton grids")
    {
        ExperimentConfig multi = cfg;
        multi.snr_db = {0.0, 5.0};
        REQUIRE_THROWS_AS(run_align_stage(multi, beams), std::invalid_argument);
    }

    std::remove(beams.c_str());
    std::remove(models.c_str());
}
