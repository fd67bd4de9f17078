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

#include <armadillo>
#include <functional>
#include <random>
#include <vector>

#include "mvlink/arrays.hpp"
#include "mvlink/channel.hpp"
#include "mvlink/scenario.hpp"

namespace mvlink
{

// Received-power tally for one vehicular region: row = commanded Tx beam,
// column = scanned Rx beam. Powers accumulate over passages; the mean matrix
// is meaningful only once every cell has been visited.
struct PowerMatrix
{
    MvRegion region;
    arma::mat sums;    // n_tx_beams x n_rx_beams, accumulated powers
    arma::umat counts; // visit counts, same dims

    // Elementwise sums/counts. Throws std::invalid_argument while any cell is
    // still unvisited.
    arma::mat mean() const;
};

// Supplies the path geometry for one passage. Wrapping the scenario keeps
// the alignment loop testable with hand-built path sets.
using PathSource = std::function<PathSet(std::mt19937_64&)>;

// Path source backed by the drive-through geometry: frozen mode returns the
// region-center paths without consuming randomness; per-pose mode samples a
// fresh pose (heading jitter in radians) for every passage.
PathSource scenario_path_source(const Environment& env, const MvRegion& region, AngleMode mode,
                                double heading_jitter = 0.0);

// Single beam-pair power measurement: |w^H (H f s + n)|^2 with the scalar
// pilot s = sigma_s. Passing noise = nullptr gives the noiseless value
// sigma_s^2 |w^H H f|^2.
double measure_pair_power(const arma::cx_mat& H, const arma::cx_vec& f, const arma::cx_vec& w,
                          double sigma_s, const arma::cx_vec* noise = nullptr);

// Multi-vehicular alignment sweep: passage l is commanded Tx beam
// (l mod n_tx_beams); a fresh fading draw builds the channel and every Rx
// beam is scanned, accumulating one power sample per (tx, rx) cell. For
// sub-connected transceivers the codebooks are sub-array codebooks and each
// beam is probed on the first sub-array (the tally ranks beams identically on
// every block, so one block suffices). Requires n_passages >= n_tx_beams so
// no row stays unvisited; sigma_n > 0 adds a fresh CN(0, sigma_n^2 I) antenna
// noise vector to every measurement.
PowerMatrix run_mv_alignment(const PathSource& paths, const MvRegion& region,
                             const HybridConfig& config, const Codebook& tx_codebook,
                             const Codebook& rx_codebook, arma::uword n_passages,
                             std::mt19937_64& rng, double sigma_s = 1.0, double sigma_n = 0.0);

// Convenience overload driving the sweep from the drive-through geometry.
PowerMatrix run_mv_alignment(const Environment& env, const MvRegion& region, AngleMode mode,
                             const HybridConfig& config, const Codebook& tx_codebook,
                             const Codebook& rx_codebook, arma::uword n_passages,
                             std::mt19937_64& rng, double sigma_s = 1.0, double sigma_n = 0.0);

struct SelectedBeams
{
    std::vector<arma::uword> tx; // distinct rows, descending row-maximum
    std::vector<arma::uword> rx; // distinct columns, descending column-maximum
};

// Picks the n_tx_rf rows with the largest row-maxima of the mean power matrix
// and, independently, the n_rx_rf columns with the largest column-maxima.
// Ties go to the lower index. Throws when the tally has unvisited cells or a
// side asks for more beams than the codebook holds.
SelectedBeams select_beams(const PowerMatrix& tally, arma::uword n_tx_rf, arma::uword n_rx_rf);

// One learned analog stage keyed by its vehicular region.
struct BeamListEntry
{
    arma::cx_mat analog_matrix; // F_RF (Tx list) or W_RF (Rx list)
    MvRegion region;
};

struct BeamLists
{
    std::vector<BeamListEntry> tx;
    std::vector<BeamListEntry> rx;
};

// Runs alignment for every region and assembles the selected beams into
// analog precoder/combiner lists (one entry per region, same order).
BeamLists build_beam_lists(const Environment& env, const std::vector<MvRegion>& regions,
                           AngleMode mode, const HybridConfig& config, arma::uword n_passages,
                           std::mt19937_64& rng, double sigma_s = 1.0, double sigma_n = 0.0);

// Index of the list entry whose region center is nearest to the pose among
// entries whose heading differs by at most heading_threshold (radians,
// wrapped); ties go to the lower index. Throws std::runtime_error when no
// entry qualifies.
std::size_t lookup_entry(const std::vector<BeamListEntry>& list, const arma::vec3& position,
                         double heading, double heading_threshold = 0.52359877559829882);

} // namespace mvlink
