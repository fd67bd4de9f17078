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
#include <string>
#include <vector>

namespace mvlink
{

// Uniform rectangular array; elements are enumerated azimuth-major, i.e.
// element (m_az, m_el) sits at index m_az * n_el + m_el.
struct UraGeometry
{
    arma::uword n_az = 1;
    arma::uword n_el = 1;
    double spacing = 0.5; // element spacing in wavelengths

    arma::uword total() const { return n_az * n_el; }
};

enum class Architecture
{
    FullyConnected,
    SubConnected,
    FullDigital
};

enum class Side
{
    Tx,
    Rx
};

std::string to_string(Architecture a);
Architecture architecture_from_string(const std::string& s);

// One end-to-end hybrid transceiver configuration (Tx = mobile, Rx = base).
struct HybridConfig
{
    Architecture arch = Architecture::FullyConnected;
    UraGeometry tx;
    UraGeometry rx;
    arma::uword n_tx_rf = 1;
    arma::uword n_rx_rf = 1;
    arma::uword n_streams = 1;

    // Throws std::invalid_argument when the configuration is inconsistent
    // (RF chain counts vs array sizes, sub-array divisibility, stream count).
    void validate() const;

    arma::uword n_rf(Side side) const { return side == Side::Tx ? n_tx_rf : n_rx_rf; }
    const UraGeometry& geometry(Side side) const { return side == Side::Tx ? tx : rx; }
};

// Sub-array carved out of the URA for one RF chain of a sub-connected
// transceiver. Sub-arrays are contiguous blocks of the azimuth-major element
// enumeration and are themselves URAs: block size n_b spanning whole azimuth
// rows (n_b / n_el rows x n_el) when n_el divides n_b, or a slice of a single
// azimuth row (1 x n_b) when n_b divides n_el.
UraGeometry sub_array_geometry(const HybridConfig& cfg, Side side);

struct Codebook
{
    enum class Scope
    {
        FullArray,
        SubArray
    };

    arma::cx_mat matrix; // (n1*n2) x (n1*n2), orthonormal columns
    arma::uword n1 = 1;  // azimuth factor size
    arma::uword n2 = 1;  // elevation factor size
    Scope scope = Scope::FullArray;
};

// Steering vector of the URA at azimuth az in (-pi, pi] and elevation el in
// [-pi/2, pi/2], entry (m_az, m_el) = exp(j 2 pi spacing (m_az sin(az) cos(el)
// + m_el sin(el))).
arma::cx_vec steering_vector(const UraGeometry& geo, double az, double el);

// Unitary n-point DFT matrix, entry (m, k) = exp(-j 2 pi m k / n) / sqrt(n).
arma::cx_mat dft_matrix(arma::uword n);

// 2D beam codebook: kron of the azimuth-factor and elevation-factor DFT
// matrices; columns are unit-norm beams with per-entry modulus 1/sqrt(n1*n2).
Codebook dft_codebook_2d(arma::uword n1, arma::uword n2, Codebook::Scope scope);

// Codebook used for beam scanning on the given side: full-array dimensions
// for fully-connected, sub-array dimensions for sub-connected transceivers.
Codebook codebook_for(const HybridConfig& cfg, Side side);

// Analog beamforming stage from the selected codebook beams.
//  - FullDigital:    identity (beam_indices ignored, may be empty)
//  - FullyConnected: columns of the full-array codebook (distinct indices)
//  - SubConnected:   block-diagonal, block k = sub-array codebook column
//                    beam_indices[k] (distinct indices)
// Entry modulus is 1/sqrt(N) inside full-array columns and 1/sqrt(N_block)
// inside sub-array blocks; all columns have unit norm.
arma::cx_mat assemble_analog(const HybridConfig& cfg, Side side,
                             const std::vector<arma::uword>& beam_indices);

} // namespace mvlink
