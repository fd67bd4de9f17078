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

#include "mvlink/arrays.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace mvlink
{

std::string to_string(Architecture a)
{
    switch (a)
    {
    case Architecture::FullyConnected:
        return "FC";
    case Architecture::SubConnected:
        return "SC";
    case Architecture::FullDigital:
        return "FD";
    }
    return "?";
}

Architecture architecture_from_string(const std::string& s)
{
    if (s == "FC")
        return Architecture::FullyConnected;
    if (s == "SC")
        return Architecture::SubConnected;
    if (s == "FD")
        return Architecture::FullDigital;
    throw std::invalid_argument("unknown architecture label: " + s);
}

static void validate_side(const HybridConfig& cfg, Side side)
{
    const arma::uword n = cfg.geometry(side).total();
    const arma::uword n_rf = cfg.n_rf(side);
    const char* tag = side == Side::Tx ? "tx" : "rx";

    if (cfg.geometry(side).n_az == 0 || cfg.geometry(side).n_el == 0)
        throw std::invalid_argument(std::string("HybridConfig: empty ") + tag + " array");
    if (!(cfg.geometry(side).spacing > 0.0))
        throw std::invalid_argument(std::string("HybridConfig: nonpositive ") + tag + " spacing");
    if (n_rf == 0)
        throw std::invalid_argument(std::string("HybridConfig: zero ") + tag + " RF chains");

    switch (cfg.arch)
    {
    case Architecture::FullDigital:
        if (n_rf != n)
            throw std::invalid_argument(std::string("HybridConfig: full-digital requires n_") + tag +
                                        "_rf == array size");
        break;
    case Architecture::FullyConnected:
        if (n_rf > n)
            throw std::invalid_argument(std::string("HybridConfig: more ") + tag +
                                        " RF chains than antennas");
        break;
    case Architecture::SubConnected:
    {
        if (n % n_rf != 0)
            throw std::invalid_argument(std::string("HybridConfig: ") + tag +
                                        " array size not divisible by RF chain count");
        const arma::uword n_b = n / n_rf;
        const arma::uword n_el = cfg.geometry(side).n_el;
        if (n_b % n_el != 0 && n_el % n_b != 0)
            throw std::invalid_argument(std::string("HybridConfig: ") + tag +
                                        " sub-array blocks are not rectangular");
        if (n_b < n_rf)
            throw std::invalid_argument(std::string("HybridConfig: ") + tag +
                                        " sub-array codebook smaller than RF chain count");
        break;
    }
    }
}

void HybridConfig::validate() const
{
    validate_side(*this, Side::Tx);
    validate_side(*this, Side::Rx);
    if (n_streams == 0 || n_streams > std::min(n_tx_rf, n_rx_rf))
        throw std::invalid_argument("HybridConfig: stream count must be in [1, min RF chains]");
}

UraGeometry sub_array_geometry(const HybridConfig& cfg, Side side)
{
    if (cfg.arch != Architecture::SubConnected)
        throw std::invalid_argument("sub_array_geometry: configuration is not sub-connected");
    cfg.validate();

    const UraGeometry& geo = cfg.geometry(side);
    const arma::uword n_b = geo.total() / cfg.n_rf(side);
    UraGeometry sub;
    sub.spacing = geo.spacing;
    if (n_b % geo.n_el == 0)
    {
        sub.n_az = n_b / geo.n_el;
        sub.n_el = geo.n_el;
    }
    else // n_el % n_b == 0, guaranteed by validate()
    {
        sub.n_az = 1;
        sub.n_el = n_b;
    }
    return sub;
}

arma::cx_vec steering_vector(const UraGeometry& geo, double az, double el)
{
    constexpr double pi = 3.14159265358979323846;
    if (!(az > -pi && az <= pi + 1e-12) || !std::isfinite(az))
        throw std::invalid_argument("steering_vector: azimuth outside (-pi, pi]");
    if (!(el >= -pi / 2 - 1e-12 && el <= pi / 2 + 1e-12) || !std::isfinite(el))
        throw std::invalid_argument("steering_vector: elevation outside [-pi/2, pi/2]");

    const double u = std::sin(az) * std::cos(el); // azimuth-axis spatial frequency
    const double v = std::sin(el);                // elevation-axis spatial frequency

    arma::cx_vec a(geo.total());
    for (arma::uword m_az = 0; m_az < geo.n_az; ++m_az)
        for (arma::uword m_el = 0; m_el < geo.n_el; ++m_el)
        {
            const double phase = 2.0 * pi * geo.spacing *
                                 (static_cast<double>(m_az) * u + static_cast<double>(m_el) * v);
            a(m_az * geo.n_el + m_el) = std::complex<double>(std::cos(phase), std::sin(phase));
        }
    return a;
}

arma::cx_mat dft_matrix(arma::uword n)
{
    if (n == 0)
        throw std::invalid_argument("dft_matrix: size must be positive");

    constexpr double pi = 3.14159265358979323846;
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    arma::cx_mat B(n, n);
    for (arma::uword m = 0; m < n; ++m)
        for (arma::uword k = 0; k < n; ++k)
        {
            const double phase = -2.0 * pi * static_cast<double>(m * k % n) / static_cast<double>(n);
            B(m, k) = s * std::complex<double>(std::cos(phase), std::sin(phase));
        }
    return B;
}

Codebook dft_codebook_2d(arma::uword n1, arma::uword n2, Codebook::Scope scope)
{
    Codebook cb;
    cb.n1 = n1;
    cb.n2 = n2;
    cb.scope = scope;
    cb.matrix = arma::kron(dft_matrix(n1), dft_matrix(n2));
    return cb;
}

Codebook codebook_for(const HybridConfig& cfg, Side side)
{
    cfg.validate();
    if (cfg.arch == Architecture::SubConnected)
    {
        const UraGeometry sub = sub_array_geometry(cfg, side);
        return dft_codebook_2d(sub.n_az, sub.n_el, Codebook::Scope::SubArray);
    }
    const UraGeometry& geo = cfg.geometry(side);
    return dft_codebook_2d(geo.n_az, geo.n_el, Codebook::Scope::FullArray);
}

arma::cx_mat assemble_analog(const HybridConfig& cfg, Side side,
                             const std::vector<arma::uword>& beam_indices)
{
    cfg.validate();
    const arma::uword n = cfg.geometry(side).total();
    const arma::uword n_rf = cfg.n_rf(side);

    if (cfg.arch == Architecture::FullDigital)
        return arma::eye<arma::cx_mat>(n, n);

    if (beam_indices.size() != n_rf)
        throw std::invalid_argument("assemble_analog: need one beam index per RF chain");
    if (std::set<arma::uword>(beam_indices.begin(), beam_indices.end()).size() != n_rf)
        throw std::invalid_argument("assemble_analog: beam indices must be distinct");

    const Codebook cb = codebook_for(cfg, side);
    for (arma::uword idx : beam_indices)
        if (idx >= cb.matrix.n_cols)
            throw std::invalid_argument("assemble_analog: beam index outside codebook");

    arma::cx_mat M(n, n_rf, arma::fill::zeros);
    if (cfg.arch == Architecture::FullyConnected)
    {
        for (arma::uword k = 0; k < n_rf; ++k)
            M.col(k) = cb.matrix.col(beam_indices[k]);
    }
    else // SubConnected: block k occupies rows [k*n_b, (k+1)*n_b)
    {
        const arma::uword n_b = n / n_rf;
        for (arma::uword k = 0; k < n_rf; ++k)
            M.submat(k * n_b, k, (k + 1) * n_b - 1, k) = cb.matrix.col(beam_indices[k]);
    }
    return M;
}

} // namespace mvlink
