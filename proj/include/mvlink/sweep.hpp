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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mvlink/config.hpp"
#include "mvlink/estimation.hpp"

namespace mvlink
{

// One point of the Cartesian sweep grid. The index enumerates points in
// nested order: architecture (outermost), RF pair, SNR, passages, radius
// (innermost); it anchors all derived random seeds.
struct GridPoint
{
    arma::uword index = 0;
    Architecture arch = Architecture::FullyConnected;
    RfPair rf;
    double snr_db = 0.0;
    arma::uword passages = 1;
    double radius_m = 1.0;
};

std::vector<GridPoint> expand_grid(const ExperimentConfig& cfg);

struct SweepRow
{
    double snr_db = 0.0;
    arma::uword passages = 0;
    arma::uword n_tx_rf = 0; // effective chain counts (antennas for FD)
    arma::uword n_rx_rf = 0;
    double radius_m = 0.0;
    Architecture architecture = Architecture::FullyConnected;
    EstimatorKind estimator = EstimatorKind::Uml;
    double se_mean = 0.0;
    double se_stderr = 0.0;
    double mse_mean = 0.0;
    double mse_stderr = 0.0;
    double crlb = 0.0;
    double mse_bound = 0.0;
    arma::uword r_hat_mode = 0; // joint rank mode over fits (dim for UML, 0 for genie)
    arma::uword trials = 0;
    std::uint64_t seed = 0; // grid-point base seed
};

struct SweepResult
{
    std::vector<SweepRow> rows;
};

// Analog stages, region, and whitener prepared for one grid point (the
// alignment product plus the derived noise statistics).
struct StagePoint
{
    HybridConfig hybrid;
    MvRegion region;
    arma::cx_mat F_RF;
    arma::cx_mat W_RF;
    Whitener whitener;
    double sigma_n_sq = 1.0;
};

// Runs MV beam alignment (identity stages for full-digital) and builds the
// post-beamforming whitener for the point.
StagePoint prepare_point(const ExperimentConfig& cfg, const GridPoint& point);

// Fits the subspace models for one prepared point: n_fits independent
// training ensembles of `passages` vehicle passages each.
struct FittedModels
{
    std::vector<SubspaceModel> js;
    std::vector<SubspaceModel> ds;
};
FittedModels fit_point(const ExperimentConfig& cfg, const GridPoint& point,
                       const StagePoint& stage, bool want_js, bool want_ds);

// Full sweep: alignment, fitting, and evaluation per grid point; one row per
// (grid point, estimator). Deterministic for a fixed config, independent of
// the thread count.
SweepResult run_sweep(const ExperimentConfig& cfg);

// RFC-4180 CSV with CRLF line endings and a mandatory header row.
void write_csv(const SweepResult& result, std::ostream& out);
std::string csv_string(const SweepResult& result);
void write_csv_file(const SweepResult& result, const std::string& path);

// Staged pipeline: each stage persists/loads artifacts so alignment,
// fitting, and evaluation can run as separate invocations. All three require
// singleton grids.
void run_align_stage(const ExperimentConfig& cfg, const std::string& beams_path);
void run_fit_stage(const ExperimentConfig& cfg, const std::string& beams_path,
                   const std::string& models_path);
SweepResult run_evaluate_stage(const ExperimentConfig& cfg, const std::string& beams_path,
                               const std::string& models_path);

} // namespace mvlink
