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

#include "mvlink/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mvlink/beam_alignment.hpp"
#include "mvlink/channel.hpp"
#include "mvlink/link_metrics.hpp"
#include "mvlink/numerics.hpp"
#include "mvlink/persistence.hpp"
#include "mvlink/rng.hpp"

namespace mvlink
{

namespace
{

bool wants(const ExperimentConfig& cfg, EstimatorKind kind)
{
    return std::find(cfg.estimators.begin(), cfg.estimators.end(), kind) !=
           cfg.estimators.end();
}

MvRegion region_for(const ExperimentConfig& cfg, const GridPoint& point)
{
    MvRegion region = cfg.region;
    region.radius = point.radius_m;
    return region;
}

arma::uword pilot_columns(const ExperimentConfig& cfg, const HybridConfig& hybrid)
{
    return cfg.pilot_cols == 0 ? hybrid.n_tx_rf : cfg.pilot_cols;
}

PathSet center_paths(const ExperimentConfig& cfg, const MvRegion& region)
{
    const VehiclePose pose{region.center, region.heading};
    return geometry_to_paths(cfg.env, pose, AngleMode::FrozenAtCenter, region);
}

// Mode of a sample of ranks; ties resolve to the smaller rank.
arma::uword mode_of(const std::vector<arma::uword>& values)
{
    std::map<arma::uword, arma::uword> counts;
    for (const arma::uword v : values)
    {
        ++counts[v];
    }
    arma::uword best = 0;
    arma::uword best_count = 0;
    for (const auto& [value, count] : counts)
    {
        if (count > best_count)
        {
            best = value;
            best_count = count;
        }
    }
    return best;
}

struct TrialMetrics
{
    double se = 0.0;
    double mse = 0.0;
};

struct PointModels
{
    std::vector<SubspaceModel> js;
    std::vector<SubspaceModel> ds;
    arma::uword r_mode_js = 0;
    arma::uword r_mode_ds = 0;
    arma::uword r_mode_ds_tx = 0;
    arma::uword r_mode_ds_rx = 0;
};

PointModels bundle_models(FittedModels&& fitted)
{
    PointModels models;
    models.js = std::move(fitted.js);
    models.ds = std::move(fitted.ds);
    if (!models.js.empty())
    {
        std::vector<arma::uword> ranks;
        for (const SubspaceModel& m : models.js)
        {
            ranks.push_back(m.r_hat);
        }
        models.r_mode_js = mode_of(ranks);
    }
    if (!models.ds.empty())
    {
        std::vector<arma::uword> joint;
        std::vector<arma::uword> tx;
        std::vector<arma::uword> rx;
        for (const SubspaceModel& m : models.ds)
        {
            joint.push_back(m.r_hat);
            tx.push_back(m.r_hat_T);
            rx.push_back(m.r_hat_R);
        }
        models.r_mode_ds = mode_of(joint);
        models.r_mode_ds_tx = mode_of(tx);
        models.r_mode_ds_rx = mode_of(rx);
    }
    return models;
}

// One estimation + link-design evaluation on a fresh test passage.
TrialMetrics evaluate_estimator(EstimatorKind kind, const arma::cx_vec& h_true,
                                const arma::cx_mat& H_true, const TrainingBlock& block,
                                const StagePoint& stage, const SubspaceModel* js,
                                const SubspaceModel* ds, arma::uword n_streams)
{
    arma::cx_vec h_hat;
    switch (kind)
    {
    case EstimatorKind::Uml:
        h_hat = uml_estimate(block);
        break;
    case EstimatorKind::Js:
        h_hat = lr_estimate(*js, block);
        break;
    case EstimatorKind::Ds:
        h_hat = lr_estimate(*ds, block);
        break;
    case EstimatorKind::PerfectCsi:
        h_hat = h_true;
        break;
    }

    TrialMetrics metrics;
    metrics.mse = mse(h_hat, h_true);
    const arma::cx_mat H_hat =
        unvec(h_hat, stage.whitener.n_rx_rf(), stage.whitener.n_tx_rf);
    const LinkDesign design =
        design_link(H_hat, stage.F_RF, stage.whitener.Q_tilde, n_streams);
    metrics.se = spectral_efficiency(H_true, design, stage.whitener.Q_tilde, n_streams);
    return metrics;
}

struct Accumulated
{
    double mean = 0.0;
    double stderr_of_mean = 0.0;
};

Accumulated accumulate(const std::vector<double>& samples)
{
    Accumulated acc;
    const double n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (const double s : samples)
    {
        sum += s;
    }
    acc.mean = sum / n;
    if (samples.size() > 1)
    {
        double ss = 0.0;
        for (const double s : samples)
        {
            ss += (s - acc.mean) * (s - acc.mean);
        }
        acc.stderr_of_mean = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return acc;
}

std::string format_number(double value)
{
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.10g", value);
    return buffer;
}

} // namespace

std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg)
{
    std::vector<GridPoint> grid;
    const std::vector<double> radii = cfg.effective_radii();
    arma::uword index = 0;
    for (const Architecture arch : cfg.architectures)
    {
        for (const RfPair& rf : cfg.rf_pairs)
        {
            for (const double snr : cfg.snr_db)
            {
                for (const arma::uword passages : cfg.passages)
                {
                    for (const double radius : radii)
                    {
                        GridPoint point;
                        point.index = index++;
                        point.arch = arch;
                        point.rf = rf;
                        point.snr_db = snr;
                        point.passages = passages;
                        point.radius_m = radius;
                        grid.push_back(point);
                    }
                }
            }
        }
    }
    return grid;
}

StagePoint prepare_point(const ExperimentConfig& cfg, const GridPoint& point)
{
    StagePoint stage;
    stage.hybrid = cfg.hybrid_for(point.arch, point.rf);
    stage.hybrid.validate();
    stage.region = region_for(cfg, point);
    stage.sigma_n_sq = std::pow(10.0, -point.snr_db / 10.0);

    if (point.arch == Architecture::FullDigital)
    {
        stage.F_RF = arma::eye<arma::cx_mat>(cfg.tx.total(), cfg.tx.total());
        stage.W_RF = arma::eye<arma::cx_mat>(cfg.rx.total(), cfg.rx.total());
    }
    else
    {
        const Codebook tx_cb = codebook_for(stage.hybrid, Side::Tx);
        const Codebook rx_cb = codebook_for(stage.hybrid, Side::Rx);
        const arma::uword n_align = cfg.align_passages != 0
                                        ? cfg.align_passages
                                        : 10 * tx_cb.matrix.n_cols;
        auto rng = make_rng(cfg.master_seed, stream::alignment, point.index);
        const PowerMatrix tally =
            run_mv_alignment(cfg.env, stage.region, cfg.angle_mode, stage.hybrid, tx_cb,
                             rx_cb, n_align, rng, 1.0, std::sqrt(stage.sigma_n_sq));
        const SelectedBeams beams =
            select_beams(tally, stage.hybrid.n_tx_rf, stage.hybrid.n_rx_rf);
        stage.F_RF = assemble_analog(stage.hybrid, Side::Tx, beams.tx);
        stage.W_RF = assemble_analog(stage.hybrid, Side::Rx, beams.rx);
    }

    NoiseModel noise;
    noise.sigma_n_sq = stage.sigma_n_sq;
    stage.whitener = noise_after_bf(noise, stage.W_RF, 1.0, stage.hybrid.n_tx_rf);
    return stage;
}

FittedModels fit_point(const ExperimentConfig& cfg, const GridPoint& point,
                       const StagePoint& stage, bool want_js, bool want_ds)
{
    FittedModels fitted;
    if (!want_js && !want_ds)
    {
        return fitted;
    }
    const PathSource source = scenario_path_source(cfg.env, stage.region, cfg.angle_mode);
    const arma::uword M = pilot_columns(cfg, stage.hybrid);

    for (arma::uword f = 0; f < cfg.n_fits; ++f)
    {
        auto rng = make_rng(cfg.master_seed, stream::training, point.index, f);
        const arma::cx_mat pilots = make_training(stage.hybrid.n_tx_rf, M, 1.0, rng);
        std::vector<TrainingBlock> blocks;
        blocks.reserve(point.passages);
        for (arma::uword l = 0; l < point.passages; ++l)
        {
            const PathSet paths = source(rng);
            const arma::cx_vec amps = draw_amplitudes(paths, rng);
            const arma::cx_mat H = assemble_channel(paths, amps, cfg.tx, cfg.rx);
            const arma::cx_mat H_c = compress_channel(H, stage.F_RF, stage.W_RF);
            blocks.push_back(simulate_block(H_c, pilots, stage.whitener, rng));
        }
        if (want_js)
        {
            fitted.js.push_back(fit_js(blocks, stage.whitener, cfg.rank_threshold,
                                       stage.region));
        }
        if (want_ds)
        {
            fitted.ds.push_back(fit_ds(blocks, stage.whitener, cfg.rank_threshold,
                                       stage.region));
        }
    }
    return fitted;
}

namespace
{

std::vector<SweepRow> evaluate_point(const ExperimentConfig& cfg, const GridPoint& point,
                                     const StagePoint& stage, const PointModels& models)
{
    const bool want_js = wants(cfg, EstimatorKind::Js);
    const bool want_ds = wants(cfg, EstimatorKind::Ds);
    const PathSource source = scenario_path_source(cfg.env, stage.region, cfg.angle_mode);
    const arma::uword M = pilot_columns(cfg, stage.hybrid);
    const arma::uword n_estimators = cfg.estimators.size();
    const arma::uword trials = cfg.trials;

    // Indexed result slots keep aggregation order fixed regardless of which
    // thread computes which trial.
    std::vector<TrialMetrics> slots(trials * n_estimators);

    const auto run_trial = [&](arma::uword t) {
        auto rng = make_rng(cfg.master_seed, stream::evaluation, point.index, 1 + t);
        const PathSet paths = source(rng);
        const arma::cx_vec amps = draw_amplitudes(paths, rng);
        const arma::cx_mat H = assemble_channel(paths, amps, cfg.tx, cfg.rx);
        const arma::cx_mat H_true = compress_channel(H, stage.F_RF, stage.W_RF);
        const arma::cx_vec h_true = vec(H_true);
        const arma::cx_mat pilots = make_training(stage.hybrid.n_tx_rf, M, 1.0, rng);
        const TrainingBlock block = simulate_block(H_true, pilots, stage.whitener, rng);

        const arma::uword fit_index = models.js.empty() && models.ds.empty()
                                          ? 0
                                          : t % cfg.n_fits;
        const SubspaceModel* js = models.js.empty() ? nullptr : &models.js[fit_index];
        const SubspaceModel* ds = models.ds.empty() ? nullptr : &models.ds[fit_index];

        for (arma::uword e = 0; e < n_estimators; ++e)
        {
            slots[t * n_estimators + e] =
                evaluate_estimator(cfg.estimators[e], h_true, H_true, block, stage, js, ds,
                                   cfg.n_streams);
        }
    };

    const arma::uword n_workers = std::min<arma::uword>(cfg.threads, trials);
    if (n_workers <= 1)
    {
        for (arma::uword t = 0; t < trials; ++t)
        {
            run_trial(t);
        }
    }
    else
    {
        std::vector<std::thread> workers;
        workers.reserve(n_workers);
        for (arma::uword w = 0; w < n_workers; ++w)
        {
            const arma::uword begin = w * trials / n_workers;
            const arma::uword end = (w + 1) * trials / n_workers;
            workers.emplace_back([&, begin, end] {
                for (arma::uword t = begin; t < end; ++t)
                {
                    run_trial(t);
                }
            });
        }
        for (std::thread& worker : workers)
        {
            worker.join();
        }
    }

    // Asymptotic bound context, needed only for the subspace estimators.
    BoundContext ctx;
    bool have_ctx = false;
    if (want_js || want_ds)
    {
        ctx = analytic_subspaces(center_paths(cfg, stage.region), cfg.tx, cfg.rx,
                                 stage.F_RF, stage.W_RF, stage.whitener);
        have_ctx = true;
    }

    std::vector<SweepRow> rows;
    rows.reserve(n_estimators);
    for (arma::uword e = 0; e < n_estimators; ++e)
    {
        const EstimatorKind kind = cfg.estimators[e];
        std::vector<double> se_samples(trials);
        std::vector<double> mse_samples(trials);
        for (arma::uword t = 0; t < trials; ++t)
        {
            se_samples[t] = slots[t * n_estimators + e].se;
            mse_samples[t] = slots[t * n_estimators + e].mse;
        }
        const Accumulated se = accumulate(se_samples);
        const Accumulated err = accumulate(mse_samples);

        SweepRow row;
        row.snr_db = point.snr_db;
        row.passages = point.passages;
        row.n_tx_rf = stage.hybrid.n_tx_rf;
        row.n_rx_rf = stage.hybrid.n_rx_rf;
        row.radius_m = point.radius_m;
        row.architecture = point.arch;
        row.estimator = kind;
        row.se_mean = se.mean;
        row.se_stderr = se.stderr_of_mean;
        row.mse_mean = err.mean;
        row.mse_stderr = err.stderr_of_mean;
        row.crlb = stage.whitener.crlb();
        row.trials = trials;
        row.seed = derive_seed(cfg.master_seed, stream::evaluation, point.index, 0);
        switch (kind)
        {
        case EstimatorKind::Uml:
            row.mse_bound = row.crlb;
            row.r_hat_mode = stage.whitener.dim();
            break;
        case EstimatorKind::Js:
            row.mse_bound = have_ctx ? mse_bound_js(ctx, models.r_mode_js) : row.crlb;
            row.r_hat_mode = models.r_mode_js;
            break;
        case EstimatorKind::Ds:
            row.mse_bound = have_ctx
                                ? mse_bound_ds(ctx, models.r_mode_ds_tx, models.r_mode_ds_rx)
                                : row.crlb;
            row.r_hat_mode = models.r_mode_ds;
            break;
        case EstimatorKind::PerfectCsi:
            row.mse_bound = 0.0;
            row.r_hat_mode = 0;
            break;
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace

SweepResult run_sweep(const ExperimentConfig& cfg)
{
    cfg.validate();
    const bool want_js = wants(cfg, EstimatorKind::Js);
    const bool want_ds = wants(cfg, EstimatorKind::Ds);

    SweepResult result;
    for (const GridPoint& point : expand_grid(cfg))
    {
        const StagePoint stage = prepare_point(cfg, point);
        const PointModels models =
            bundle_models(fit_point(cfg, point, stage, want_js, want_ds));
        std::vector<SweepRow> rows = evaluate_point(cfg, point, stage, models);
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    }
    return result;
}

void write_csv(const SweepResult& result, std::ostream& out)
{
    out << "snr_db,passages,n_tx_rf,n_rx_rf,radius_m,architecture,estimator,"
           "se_mean,se_stderr,mse_mean,mse_stderr,crlb,mse_bound,r_hat_mode,trials,seed\r\n";
    for (const SweepRow& row : result.rows)
    {
        out << format_number(row.snr_db) << ',' << row.passages << ',' << row.n_tx_rf << ','
            << row.n_rx_rf << ',' << format_number(row.radius_m) << ','
            << to_string(row.architecture) << ',' << to_string(row.estimator) << ','
            << format_number(row.se_mean) << ',' << format_number(row.se_stderr) << ','
            << format_number(row.mse_mean) << ',' << format_number(row.mse_stderr) << ','
            << format_number(row.crlb) << ',' << format_number(row.mse_bound) << ','
            << row.r_hat_mode << ',' << row.trials << ',' << row.seed << "\r\n";
    }
}

std::string csv_string(const SweepResult& result)
{
    std::ostringstream out;
    write_csv(result, out);
    return out.str();
}

void write_csv_file(const SweepResult& result, const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw std::runtime_error("sweep: cannot open output '" + path + "'");
    }
    write_csv(result, out);
    if (!out)
    {
        throw std::runtime_error("sweep: write failed for '" + path + "'");
    }
}

namespace
{

void require_singleton(const ExperimentConfig& cfg, const char* verb)
{
    if (cfg.architectures.size() != 1 || cfg.rf_pairs.size() != 1 ||
        cfg.snr_db.size() != 1 || cfg.passages.size() != 1 ||
        cfg.effective_radii().size() != 1)
    {
        throw std::invalid_argument(std::string(verb) +
                                    ": staged runs require singleton grids");
    }
}

arma::cx_mat region_block(const MvRegion& region)
{
    arma::cx_mat block(5, 1, arma::fill::zeros);
    block(0, 0) = region.center(0);
    block(1, 0) = region.center(1);
    block(2, 0) = region.center(2);
    block(3, 0) = region.heading;
    block(4, 0) = region.radius;
    return block;
}

MvRegion region_from_block(const arma::cx_mat& block)
{
    if (block.n_rows != 5 || block.n_cols != 1)
    {
        throw std::runtime_error("artifact: malformed region block");
    }
    MvRegion region;
    region.center = {block(0, 0).real(), block(1, 0).real(), block(2, 0).real()};
    region.heading = block(3, 0).real();
    region.radius = block(4, 0).real();
    return region;
}

} // namespace

void run_align_stage(const ExperimentConfig& cfg, const std::string& beams_path)
{
    cfg.validate();
    require_singleton(cfg, "align");
    const GridPoint point = expand_grid(cfg).front();
    const StagePoint stage = prepare_point(cfg, point);

    std::vector<NamedMatrix> blocks;
    blocks.push_back({"f_rf/0", stage.F_RF});
    blocks.push_back({"w_rf/0", stage.W_RF});
    blocks.push_back({"region/0", region_block(stage.region)});
    save_artifact(beams_path, config_fingerprint(cfg), cfg.master_seed, blocks);
}

namespace
{

StagePoint stage_from_artifact(const ExperimentConfig& cfg, const GridPoint& point,
                               const ArtifactFile& beams)
{
    StagePoint stage;
    stage.hybrid = cfg.hybrid_for(point.arch, point.rf);
    stage.hybrid.validate();
    stage.region = region_from_block(beams.find("region/0"));
    stage.sigma_n_sq = std::pow(10.0, -point.snr_db / 10.0);
    stage.F_RF = beams.find("f_rf/0");
    stage.W_RF = beams.find("w_rf/0");
    NoiseModel noise;
    noise.sigma_n_sq = stage.sigma_n_sq;
    stage.whitener = noise_after_bf(noise, stage.W_RF, 1.0, stage.hybrid.n_tx_rf);
    return stage;
}

} // namespace

void run_fit_stage(const ExperimentConfig& cfg, const std::string& beams_path,
                   const std::string& models_path)
{
    cfg.validate();
    require_singleton(cfg, "fit");
    const GridPoint point = expand_grid(cfg).front();
    const ArtifactFile beams = load_artifact_checked(beams_path, config_fingerprint(cfg));
    const StagePoint stage = stage_from_artifact(cfg, point, beams);

    const bool want_js = wants(cfg, EstimatorKind::Js);
    const bool want_ds = wants(cfg, EstimatorKind::Ds);
    if (!want_js && !want_ds)
    {
        throw std::invalid_argument("fit: estimator set contains no subspace estimator");
    }
    const FittedModels fitted = fit_point(cfg, point, stage, want_js, want_ds);

    std::vector<NamedMatrix> blocks;
    blocks.push_back({"region/0", region_block(stage.region)});
    for (std::size_t f = 0; f < fitted.js.size(); ++f)
    {
        const SubspaceModel& m = fitted.js[f];
        blocks.push_back({"js_u/" + std::to_string(f), m.U});
        arma::cx_mat meta(1, 1);
        meta(0, 0) = static_cast<double>(m.r_hat);
        blocks.push_back({"js_meta/" + std::to_string(f), meta});
    }
    for (std::size_t f = 0; f < fitted.ds.size(); ++f)
    {
        const SubspaceModel& m = fitted.ds[f];
        blocks.push_back({"ds_ut/" + std::to_string(f), m.U_T});
        blocks.push_back({"ds_ur/" + std::to_string(f), m.U_R});
        arma::cx_mat meta(2, 1);
        meta(0, 0) = static_cast<double>(m.r_hat_T);
        meta(1, 0) = static_cast<double>(m.r_hat_R);
        blocks.push_back({"ds_meta/" + std::to_string(f), meta});
    }
    save_artifact(models_path, config_fingerprint(cfg), cfg.master_seed, blocks);
}

SweepResult run_evaluate_stage(const ExperimentConfig& cfg, const std::string& beams_path,
                               const std::string& models_path)
{
    cfg.validate();
    require_singleton(cfg, "evaluate");
    const GridPoint point = expand_grid(cfg).front();
    const ArtifactFile beams = load_artifact_checked(beams_path, config_fingerprint(cfg));
    const StagePoint stage = stage_from_artifact(cfg, point, beams);

    const bool want_js = wants(cfg, EstimatorKind::Js);
    const bool want_ds = wants(cfg, EstimatorKind::Ds);
    FittedModels fitted;
    if (want_js || want_ds)
    {
        const ArtifactFile models_file =
            load_artifact_checked(models_path, config_fingerprint(cfg));
        for (arma::uword f = 0; f < cfg.n_fits; ++f)
        {
            const std::string tag = std::to_string(f);
            if (want_js)
            {
                SubspaceModel m;
                m.kind = SubspaceModel::Kind::Joint;
                m.U = models_file.find("js_u/" + tag);
                m.r_hat = static_cast<arma::uword>(
                    std::llround(models_file.find("js_meta/" + tag)(0, 0).real()));
                m.whitener = stage.whitener;
                m.region = stage.region;
                fitted.js.push_back(std::move(m));
            }
            if (want_ds)
            {
                SubspaceModel m;
                m.kind = SubspaceModel::Kind::Disjoint;
                m.U_T = models_file.find("ds_ut/" + tag);
                m.U_R = models_file.find("ds_ur/" + tag);
                const arma::cx_mat& meta = models_file.find("ds_meta/" + tag);
                m.r_hat_T = static_cast<arma::uword>(std::llround(meta(0, 0).real()));
                m.r_hat_R = static_cast<arma::uword>(std::llround(meta(1, 0).real()));
                m.r_hat = m.r_hat_T * m.r_hat_R;
                m.whitener = stage.whitener;
                m.region = stage.region;
                fitted.ds.push_back(std::move(m));
            }
        }
    }

    const PointModels models = bundle_models(std::move(fitted));
    SweepResult result;
    std::vector<SweepRow> rows = evaluate_point(cfg, point, stage, models);
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    return result;
}

} // namespace mvlink
