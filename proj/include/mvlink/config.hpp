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

#include <cstdint>
#include <string>
#include <vector>

#include "mvlink/arrays.hpp"
#include "mvlink/scenario.hpp"

namespace mvlink
{

enum class EstimatorKind
{
    Uml,       // unstructured least-squares estimate
    Js,        // joint-space low-rank estimate
    Ds,        // disjoint-space low-rank estimate
    PerfectCsi // genie-aided reference
};

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& label);

struct RfPair
{
    arma::uword n_tx_rf = 1;
    arma::uword n_rx_rf = 1;
};

// Full experiment description: scenario, transceiver, sweep grids, Monte
// Carlo depth, and output location. Loadable from JSON; every CLI flag
// overrides its file counterpart.
struct ExperimentConfig
{
    // Scenario. preset selects a built-in environment ("s1", "s2");
    // "custom" takes env/region verbatim from the file.
    std::string preset = "s1";
    Environment env;
    MvRegion region;
    AngleMode angle_mode = AngleMode::FrozenAtCenter;

    // Transceiver.
    UraGeometry tx{8, 8, 0.5};
    UraGeometry rx{16, 8, 0.5};
    arma::uword n_streams = 1;
    std::vector<Architecture> architectures{Architecture::FullyConnected};

    // Sweep grids. Full-digital points ignore the RF pair (one chain per
    // antenna). An empty radius grid falls back to the region radius.
    std::vector<double> snr_db{-10.0};
    std::vector<arma::uword> passages{1000};
    std::vector<RfPair> rf_pairs{RfPair{4, 8}};
    std::vector<double> radii_m;
    std::vector<EstimatorKind> estimators{EstimatorKind::Uml, EstimatorKind::Js,
                                          EstimatorKind::Ds, EstimatorKind::PerfectCsi};

    // Monte Carlo depth and reproducibility.
    arma::uword trials = 200;
    arma::uword n_fits = 10;
    arma::uword align_passages = 0; // 0: ten sweeps over the Tx codebook
    std::uint64_t master_seed = 12345;
    std::string out_path = "sweep.csv";
    arma::uword threads = 1;

    // Estimator knobs.
    double rank_threshold = 0.999;
    arma::uword fd_fit_max_dim = 1024; // subspace fits refuse larger FD problems
    arma::uword pilot_cols = 0;        // 0: one pilot column per Tx chain

    // Hybrid configuration for one grid point. Full-digital overrides the
    // chain counts with the antenna counts.
    HybridConfig hybrid_for(Architecture arch, const RfPair& rf) const;
    std::vector<double> effective_radii() const;

    // Throws std::invalid_argument describing the first violation.
    void validate() const;
};

ExperimentConfig default_config();

// Strict JSON parsing: unknown keys and malformed values raise
// std::invalid_argument with the offending key in the message.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical pretty-printed JSON round-trippable through the parser.
std::string config_to_json(const ExperimentConfig& cfg);

// Hash of the structural parameters (scenario, arrays, grids, estimator
// knobs) used to pair persisted artifacts with a run. Runtime knobs such as
// trials, threads, estimator set, seed, and output path are excluded.
std::uint64_t config_fingerprint(const ExperimentConfig& cfg);

} // namespace mvlink
