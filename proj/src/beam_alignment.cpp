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

#include "mvlink/beam_alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mvlink
{

namespace
{

constexpr double pi = 3.14159265358979323846;

double wrap_angle(double a)
{
    a = std::fmod(a + pi, 2.0 * pi);
    if (a < 0.0)
        a += 2.0 * pi;
    return a - pi;
}

// Embeds a (possibly sub-array) beam column into a full-array weight vector.
// Sub-array beams are applied on the first contiguous block; all other
// antennas stay silent for the probe.
arma::cx_vec embed_beam(const arma::cx_vec& beam, arma::uword full_size)
{
    if (beam.n_elem > full_size)
        throw std::invalid_argument("embed_beam: beam longer than the array");
    if (beam.n_elem == full_size)
        return beam;
    arma::cx_vec out(full_size, arma::fill::zeros);
    out.head(beam.n_elem) = beam;
    return out;
}

arma::cx_vec draw_noise(arma::uword n, double sigma_n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, sigma_n / std::sqrt(2.0));
    arma::cx_vec v(n);
    for (arma::uword i = 0; i < n; ++i)
    {
        const double re = g(rng);
        const double im = g(rng);
        v(i) = {re, im};
    }
    return v;
}

// Distinct indices of the n largest scores, descending; ties to lower index.
std::vector<arma::uword> top_indices(const arma::vec& scores, arma::uword n)
{
    std::vector<arma::uword> order(scores.n_elem);
    std::iota(order.begin(), order.end(), arma::uword{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](arma::uword a, arma::uword b) { return scores(a) > scores(b); });
    order.resize(n);
    return order;
}

} // namespace

arma::mat PowerMatrix::mean() const
{
    if (sums.n_rows != counts.n_rows || sums.n_cols != counts.n_cols)
        throw std::invalid_argument("PowerMatrix: sums/counts shape mismatch");
    if (arma::any(arma::vectorise(counts) == 0))
        throw std::invalid_argument("PowerMatrix: mean undefined while cells are unvisited");
    return sums / arma::conv_to<arma::mat>::from(counts);
}

PathSource scenario_path_source(const Environment& env, const MvRegion& region, AngleMode mode,
                                double heading_jitter)
{
    if (mode == AngleMode::FrozenAtCenter)
    {
        // angles never move, so resolve the geometry once up front
        PathSet frozen =
            geometry_to_paths(env, {region.center, region.heading}, AngleMode::FrozenAtCenter, region);
        return [frozen](std::mt19937_64&) { return frozen; };
    }
    return [env, region, heading_jitter](std::mt19937_64& rng) {
        VehiclePose pose = sample_passage(region, heading_jitter, rng);
        return geometry_to_paths(env, pose, AngleMode::PerPose, region);
    };
}

double measure_pair_power(const arma::cx_mat& H, const arma::cx_vec& f, const arma::cx_vec& w,
                          double sigma_s, const arma::cx_vec* noise)
{
    if (f.n_elem != H.n_cols || w.n_elem != H.n_rows)
        throw std::invalid_argument("measure_pair_power: beam dims do not match the channel");
    arma::cx_vec received = H * f * sigma_s;
    if (noise != nullptr)
    {
        if (noise->n_elem != H.n_rows)
            throw std::invalid_argument("measure_pair_power: noise length mismatch");
        received += *noise;
    }
    const std::complex<double> y = arma::cdot(w, received); // w^H r
    return std::norm(y);
}

PowerMatrix run_mv_alignment(const PathSource& paths, const MvRegion& region,
                             const HybridConfig& config, const Codebook& tx_codebook,
                             const Codebook& rx_codebook, arma::uword n_passages,
                             std::mt19937_64& rng, double sigma_s, double sigma_n)
{
    config.validate();
    const arma::uword n_tx_beams = tx_codebook.matrix.n_cols;
    const arma::uword n_rx_beams = rx_codebook.matrix.n_cols;
    if (n_passages < n_tx_beams)
        throw std::invalid_argument("run_mv_alignment: need at least one passage per Tx beam");
    if (sigma_s <= 0.0 || sigma_n < 0.0)
        throw std::invalid_argument("run_mv_alignment: invalid signal/noise levels");

    PowerMatrix tally;
    tally.region = region;
    tally.sums.zeros(n_tx_beams, n_rx_beams);
    tally.counts.zeros(n_tx_beams, n_rx_beams);

    const arma::uword n_t = config.tx.total();
    const arma::uword n_r = config.rx.total();

    // full-array probe weights; sub-array beams sit on the first block
    std::vector<arma::cx_vec> tx_probes(n_tx_beams), rx_probes(n_rx_beams);
    for (arma::uword i = 0; i < n_tx_beams; ++i)
        tx_probes[i] = embed_beam(tx_codebook.matrix.col(i), n_t);
    for (arma::uword j = 0; j < n_rx_beams; ++j)
        rx_probes[j] = embed_beam(rx_codebook.matrix.col(j), n_r);

    for (arma::uword l = 0; l < n_passages; ++l)
    {
        const arma::uword tx_beam = l % n_tx_beams;
        const PathSet p = paths(rng);
        const arma::cx_vec amps = draw_amplitudes(p, rng);
        const arma::cx_mat H = assemble_channel(p, amps, config.tx, config.rx);
        for (arma::uword j = 0; j < n_rx_beams; ++j)
        {
            double power;
            if (sigma_n > 0.0)
            {
                const arma::cx_vec noise = draw_noise(n_r, sigma_n, rng);
                power = measure_pair_power(H, tx_probes[tx_beam], rx_probes[j], sigma_s, &noise);
            }
            else
            {
                power = measure_pair_power(H, tx_probes[tx_beam], rx_probes[j], sigma_s);
            }
            tally.sums(tx_beam, j) += power;
            tally.counts(tx_beam, j) += 1;
        }
    }
    return tally;
}

PowerMatrix run_mv_alignment(const Environment& env, const MvRegion& region, AngleMode mode,
                             const HybridConfig& config, const Codebook& tx_codebook,
                             const Codebook& rx_codebook, arma::uword n_passages,
                             std::mt19937_64& rng, double sigma_s, double sigma_n)
{
    return run_mv_alignment(scenario_path_source(env, region, mode), region, config, tx_codebook,
                            rx_codebook, n_passages, rng, sigma_s, sigma_n);
}

SelectedBeams select_beams(const PowerMatrix& tally, arma::uword n_tx_rf, arma::uword n_rx_rf)
{
    const arma::mat mean = tally.mean();
    if (n_tx_rf > mean.n_rows)
        throw std::invalid_argument("select_beams: more Tx chains than Tx beams");
    if (n_rx_rf > mean.n_cols)
        throw std::invalid_argument("select_beams: more Rx chains than Rx beams");

    SelectedBeams out;
    out.tx = top_indices(arma::max(mean, 1), n_tx_rf); // row maxima
    out.rx = top_indices(arma::max(mean, 0).t(), n_rx_rf); // column maxima
    return out;
}

BeamLists build_beam_lists(const Environment& env, const std::vector<MvRegion>& regions,
                           AngleMode mode, const HybridConfig& config, arma::uword n_passages,
                           std::mt19937_64& rng, double sigma_s, double sigma_n)
{
    if (regions.empty())
        throw std::invalid_argument("build_beam_lists: no regions");
    const Codebook tx_cb = codebook_for(config, Side::Tx);
    const Codebook rx_cb = codebook_for(config, Side::Rx);

    BeamLists lists;
    lists.tx.reserve(regions.size());
    lists.rx.reserve(regions.size());
    for (const MvRegion& region : regions)
    {
        PowerMatrix tally = run_mv_alignment(env, region, mode, config, tx_cb, rx_cb, n_passages,
                                             rng, sigma_s, sigma_n);
        SelectedBeams beams = select_beams(tally, config.n_tx_rf, config.n_rx_rf);
        lists.tx.push_back({assemble_analog(config, Side::Tx, beams.tx), region});
        lists.rx.push_back({assemble_analog(config, Side::Rx, beams.rx), region});
    }
    return lists;
}

std::size_t lookup_entry(const std::vector<BeamListEntry>& list, const arma::vec3& position,
                         double heading, double heading_threshold)
{
    std::size_t best = list.size();
    double best_dist = 0.0;
    for (std::size_t k = 0; k < list.size(); ++k)
    {
        if (std::abs(wrap_angle(heading - list[k].region.heading)) > heading_threshold)
            continue;
        const double d = arma::norm(position - list[k].region.center);
        if (best == list.size() || d < best_dist) // strict < keeps the lower index on ties
        {
            best = k;
            best_dist = d;
        }
    }
    if (best == list.size())
        throw std::runtime_error("lookup_entry: no stored region matches the pose heading");
    return best;
}

} // namespace mvlink
