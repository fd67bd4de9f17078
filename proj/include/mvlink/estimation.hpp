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
#include <random>
#include <vector>

#include "mvlink/scenario.hpp"

namespace mvlink
{

// One training burst of a vehicle passage, observed after the analog stages:
// received = H_compressed * pilots + noise, both n x M with M pilot symbols.
struct TrainingBlock
{
    arma::cx_mat pilots;   // n_tx_rf x M
    arma::cx_mat received; // n_rx_rf x M
    double sigma_s = 1.0;  // pilot scale: pilots * pilots^H = sigma_s^2 I

    // Throws std::invalid_argument on shape mismatch, M < n_tx_rf, or a pilot
    // Gram that deviates from sigma_s^2 I.
    void validate() const;
};

// Antenna-domain noise statistics. An empty Q_n means white noise
// sigma_n_sq * I of whatever antenna count the caller needs.
struct NoiseModel
{
    double sigma_n_sq = 1.0;
    arma::cx_mat Q_n; // optional full covariance, Hermitian PSD

    arma::cx_mat covariance(arma::uword n_antennas) const;
};

// Error statistics of the unstructured estimate after analog combining:
// Q_tilde = W_RF^H Q_n W_RF, and the estimation-error covariance
// C = (1/sigma_s^2) I_{n_tx_rf} (x) Q_tilde with its Hermitian square-root
// factors. Everything is stored at the Q_tilde level; the Kronecker lift is
// only materialized on demand so large full-digital dimensions stay cheap.
// A numerically zero Q_tilde (noise-free operation) degrades to identity
// factors and noise_floor = 0.
struct Whitener
{
    arma::uword n_tx_rf = 1;
    double sigma_s = 1.0;
    arma::cx_mat Q_tilde;     // n_rx_rf x n_rx_rf
    arma::cx_mat Q_half;      // Q_tilde^{1/2} (identity when noise-free)
    arma::cx_mat Q_inv_half;  // Q_tilde^{-1/2} (identity when noise-free)
    double noise_floor = 1.0; // per-dimension whitened noise level (0 if noise-free)

    arma::uword n_rx_rf() const { return Q_tilde.n_rows; }
    arma::uword dim() const { return n_tx_rf * n_rx_rf(); }

    // Whitened matrix form: sigma_s * Q_tilde^{-1/2} * Y.
    arma::cx_mat whiten_matrix(const arma::cx_mat& Y) const;
    arma::cx_mat dewhiten_matrix(const arma::cx_mat& Y) const;
    // Vectorized forms, i.e. multiplication by C^{-1/2} / C^{1/2}.
    arma::cx_vec whiten(const arma::cx_vec& h) const;
    arma::cx_vec dewhiten(const arma::cx_vec& h) const;

    // Materialized Kronecker lifts (intended for moderate dimensions).
    arma::cx_mat C() const;
    arma::cx_mat C_half() const;
    arma::cx_mat C_inv_half() const;

    // tr(C) = n_tx_rf * tr(Q_tilde) / sigma_s^2, the unstructured-estimator
    // error floor.
    double crlb() const;
};

// Propagation-subspace model fitted from whitened training passages. The
// joint flavor keeps one basis over the full compressed dimension; the
// disjoint flavor keeps per-side bases whose Kronecker product forms the
// projector.
struct SubspaceModel
{
    enum class Kind
    {
        Joint,
        Disjoint
    };

    Kind kind = Kind::Joint;
    arma::cx_mat U;        // Joint: dim x r_hat, orthonormal columns
    arma::cx_mat U_T, U_R; // Disjoint: per-side orthonormal bases
    arma::uword r_hat = 0; // Joint rank (Disjoint: r_hat_T * r_hat_R)
    arma::uword r_hat_T = 0;
    arma::uword r_hat_R = 0;
    arma::vec spectrum_joint; // raw eigenvalues of the whitened sample correlation
    arma::vec spectrum_tx;   // raw eigenvalues of the Tx-side correlation
    arma::vec spectrum_rx;   // raw eigenvalues of the Rx-side correlation
    Whitener whitener;
    MvRegion region;

    // Orthogonal projector in whitened coordinates: U U^H, or the Kronecker
    // conj(U_T) U_T^T (x) U_R U_R^H for the disjoint flavor.
    arma::cx_mat projector_whitened() const;
    // De-whitened (oblique) projector C^{1/2} P C^{-1/2} acting on raw
    // unstructured estimates.
    arma::cx_mat projector() const;
    // Applies the de-whitened projector without materializing it.
    arma::cx_vec apply(const arma::cx_vec& h) const;
};

// Pilot matrix with pilots * pilots^H = sigma_s^2 I exactly: the first
// n_tx_rf rows of a unitary M-point basis, right-rotated by a random
// diagonal phase so independent draws decorrelate across vehicles.
arma::cx_mat make_training(arma::uword n_tx_rf, arma::uword M, double sigma_s,
                           std::mt19937_64& rng);

// Compressed noise statistics and whitening factors for the given analog
// combiner. Throws std::invalid_argument when Q_n is not Hermitian PSD.
Whitener noise_after_bf(const NoiseModel& noise, const arma::cx_mat& W_RF, double sigma_s,
                        arma::uword n_tx_rf);

// Synthesizes one training block: received = H_compressed * pilots + N with
// noise columns drawn i.i.d. CN(0, Q_tilde) (no noise when the whitener is
// noise-free).
TrainingBlock simulate_block(const arma::cx_mat& H_compressed, const arma::cx_mat& pilots,
                             const Whitener& whitener, std::mt19937_64& rng);

// Unstructured least-squares estimate vec(Y S^H (S S^H)^{-1}); equals the
// Kronecker pseudo-inverse form. Throws on a singular pilot Gram.
arma::cx_vec uml_estimate(const TrainingBlock& block);

// Smallest r whose leading eigenvalues reach the threshold fraction of the
// total (cumulative-energy percentile rule). Eigenvalues must be descending
// and nonnegative up to rounding; negatives within tolerance are clipped.
// Throws std::invalid_argument on an all-zero spectrum.
arma::uword estimate_rank(const arma::vec& eigenvalues, double threshold = 0.999);

// Fits the joint-space model: whitened sample correlation over passages,
// rank by the percentile rule applied after subtracting the known whitened
// noise floor (one unit per dimension; a spectrum with no energy above the
// floor falls back to rank 1), basis = leading eigenvectors.
SubspaceModel fit_js(const std::vector<TrainingBlock>& blocks, const Whitener& whitener,
                     double rank_threshold = 0.999, const MvRegion& region = {});

// Fits the disjoint-space model from the two side correlations of the
// whitened sample matrices; floors are n_rx_rf (Tx side) and n_tx_rf
// (Rx side) whitened units.
SubspaceModel fit_ds(const std::vector<TrainingBlock>& blocks, const Whitener& whitener,
                     double rank_threshold = 0.999, const MvRegion& region = {});

// Low-rank estimate: the model's de-whitened projector applied to the
// unstructured estimate of the block.
arma::cx_vec lr_estimate(const SubspaceModel& model, const TrainingBlock& block);

} // namespace mvlink
