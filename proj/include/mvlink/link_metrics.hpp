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

#include "mvlink/channel.hpp"
#include "mvlink/estimation.hpp"

namespace mvlink
{

// Baseband stages designed from an estimated compressed channel.
struct LinkDesign
{
    arma::cx_mat F_BB;          // n_tx_rf x n_streams
    arma::cx_mat W_BB;          // n_rx_rf x n_streams
    bool rank_deficient = false; // streams beyond the channel rank were zero-padded
};

struct PrecoderResult
{
    arma::cx_mat F_BB;
    bool rank_deficient = false;
};

// Digital precoder: top-n_streams eigenvectors of H_hat^H H_hat, globally
// rescaled so ||F_RF * F_BB||_F^2 = n_streams. Streams beyond the numerical
// rank of H_hat are zero columns and flagged instead of raising.
PrecoderResult digital_precoder(const arma::cx_mat& H_hat, const arma::cx_mat& F_RF,
                                arma::uword n_streams);

// Unconstrained MMSE combiner for the estimated effective channel
// A = H_hat * F_BB with per-stream signal power 1/n_streams:
// W_BB^H = (A^H Q_tilde^{-1} A + I/n_streams)^{-1} A^H Q_tilde^{-1}.
// Throws std::invalid_argument when Q_tilde is singular.
arma::cx_mat mmse_combiner(const arma::cx_mat& H_hat, const arma::cx_mat& F_BB,
                           const arma::cx_mat& Q_tilde, arma::uword n_streams);

// Convenience wrapper running both baseband designs.
LinkDesign design_link(const arma::cx_mat& H_hat, const arma::cx_mat& F_RF,
                       const arma::cx_mat& Q_tilde, arma::uword n_streams);

// Spectral efficiency of the true compressed channel under the (possibly
// mismatched) design: log2 det(I + (1/n_streams) Q_eff^{-1} H_eff H_eff^H)
// with H_eff = W_BB^H H_true F_BB and Q_eff = W_BB^H Q_tilde W_BB
// (ridge-stabilized). A vanishing effective channel scores 0.
double spectral_efficiency(const arma::cx_mat& H_true, const LinkDesign& design,
                           const arma::cx_mat& Q_tilde, arma::uword n_streams);

// Squared estimation error ||h_hat - h_true||^2 for one trial.
double mse(const arma::cx_vec& h_hat, const arma::cx_vec& h_true);

// Deterministic eigenstructure of the analytic (asymptotic) whitened
// correlations of a path set under fixed analog stages: full eigenbases so
// projectors can be truncated at any rank, the analytic ranks, and the
// materialized whitened correlation and error covariance used by the
// asymptotic error bound.
struct BoundContext
{
    arma::cx_mat U_joint;   // dim x dim eigenbasis of the whitened correlation
    arma::cx_mat U_T;       // n_tx_rf x n_tx_rf eigenbasis (Tx side)
    arma::cx_mat U_R;       // n_rx_rf x n_rx_rf eigenbasis (Rx side)
    arma::uword r_joint = 0; // analytic ranks
    arma::uword r_T = 0;
    arma::uword r_R = 0;
    arma::cx_mat M; // whitened analytic correlation (dim x dim)
    arma::cx_mat C; // estimation-error covariance (dim x dim)
};

BoundContext analytic_subspaces(const PathSet& paths, const UraGeometry& tx,
                                const UraGeometry& rx, const arma::cx_mat& F_RF,
                                const arma::cx_mat& W_RF, const Whitener& whitener);

// Asymptotic error floor of the rank-r_hat joint-space estimator:
// tr(P C P^H) + tr(dP R dP^H) with P the de-whitened analytic projector at
// r_hat and dP the defect against the analytic rank.
double mse_bound_js(const BoundContext& ctx, arma::uword r_hat);

// Disjoint-space counterpart truncating the two side bases.
double mse_bound_ds(const BoundContext& ctx, arma::uword r_hat_T, arma::uword r_hat_R);

} // namespace mvlink
