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

#include "mvlink/arrays.hpp"

#include <optional>
#include <random>

namespace mvlink
{

// Geometric multipath description: per-path departure angles (mobile side),
// arrival angles (base side) and average power fractions summing to one.
struct PathSet
{
    arma::vec aod_az, aod_el; // departure angles
    arma::vec aoa_az, aoa_el; // arrival angles
    arma::vec powers;         // nonnegative, sums to 1

    arma::uword count() const { return powers.n_elem; }
    void validate() const;
};

// Steering matrix: column p is the steering vector at (az(p), el(p)).
arma::cx_mat steering_matrix(const UraGeometry& geo, const arma::vec& az, const arma::vec& el);

// Complex path amplitudes: independent circular Gaussians with per-path
// variance equal to the path power fraction.
arma::cx_vec draw_amplitudes(const PathSet& paths, std::mt19937_64& rng);

// Narrowband channel matrix H = A_R diag(alpha) A_T^T (arrival steering on
// the left, transposed departure steering on the right).
arma::cx_mat assemble_channel(const PathSet& paths, const arma::cx_vec& amplitudes,
                              const UraGeometry& tx, const UraGeometry& rx);

// Channel after the analog stages: W_RF^H H F_RF.
arma::cx_mat compress_channel(const arma::cx_mat& H, const arma::cx_mat& F_RF,
                              const arma::cx_mat& W_RF);

// Compressed-domain path signature matrix: column p is
// (F_RF^T a_T(psi_p)) kron (W_RF^H a_R(theta_p)), so that
// vec(W^H H F) = T * alpha.
arma::cx_mat path_signature_matrix(const PathSet& paths, const UraGeometry& tx,
                                   const UraGeometry& rx, const arma::cx_mat& F_RF,
                                   const arma::cx_mat& W_RF);

// Correlation of the vectorized compressed channel, T diag(powers) T^H.
arma::cx_mat compressed_correlation(const PathSet& paths, const UraGeometry& tx,
                                    const UraGeometry& rx, const arma::cx_mat& F_RF,
                                    const arma::cx_mat& W_RF);

// Transmit- and receive-side correlations of the compressed channel:
//   R_T = E[Hc^H Hc] = sum_p powers_p ||W^H a_R||^2 (F^T a_T)* (F^T a_T)^T
//   R_R = E[Hc Hc^H] = sum_p powers_p ||F^T a_T||^2 (W^H a_R) (W^H a_R)^H
struct SideCorrelations
{
    arma::cx_mat tx; // n_tx_rf x n_tx_rf
    arma::cx_mat rx; // n_rx_rf x n_rx_rf
};
SideCorrelations side_correlations(const PathSet& paths, const UraGeometry& tx,
                                   const UraGeometry& rx, const arma::cx_mat& F_RF,
                                   const arma::cx_mat& W_RF);

// Numerical ranks of the steering families before and (optionally) after the
// analog stages.
struct DiversityOrders
{
    arma::uword tx = 0;    // rank of A_T
    arma::uword rx = 0;    // rank of A_R
    arma::uword joint = 0; // rank of khatri_rao(A_T, A_R)

    // present when analog stages were supplied
    std::optional<arma::uword> tx_compressed;
    std::optional<arma::uword> rx_compressed;
    std::optional<arma::uword> joint_compressed;
};
DiversityOrders diversity_orders(const PathSet& paths, const UraGeometry& tx,
                                 const UraGeometry& rx, const arma::cx_mat* F_RF = nullptr,
                                 const arma::cx_mat* W_RF = nullptr);

} // namespace mvlink
