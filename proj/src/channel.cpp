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

#include "mvlink/channel.hpp"

#include "mvlink/numerics.hpp"

#include <stdexcept>

namespace mvlink
{

void PathSet::validate() const
{
    const arma::uword p = powers.n_elem;
    if (p == 0)
        throw std::invalid_argument("PathSet: at least one path required");
    if (aod_az.n_elem != p || aod_el.n_elem != p || aoa_az.n_elem != p || aoa_el.n_elem != p)
        throw std::invalid_argument("PathSet: angle vectors must match the power count");
    if (powers.min() < 0.0)
        throw std::invalid_argument("PathSet: negative path power");
    if (std::abs(arma::accu(powers) - 1.0) > 1e-9)
        throw std::invalid_argument("PathSet: powers must sum to one");
}

arma::cx_mat steering_matrix(const UraGeometry& geo, const arma::vec& az, const arma::vec& el)
{
    if (az.n_elem != el.n_elem)
        throw std::invalid_argument("steering_matrix: angle vectors differ in length");
    arma::cx_mat A(geo.total(), az.n_elem);
    for (arma::uword p = 0; p < az.n_elem; ++p)
        A.col(p) = steering_vector(geo, az(p), el(p));
    return A;
}

arma::cx_vec draw_amplitudes(const PathSet& paths, std::mt19937_64& rng)
{
    paths.validate();
    std::normal_distribution<double> g(0.0, 1.0);
    arma::cx_vec a(paths.count());
    for (arma::uword p = 0; p < paths.count(); ++p)
    {
        const double s = std::sqrt(paths.powers(p) / 2.0);
        const double re = g(rng), im = g(rng);
        a(p) = std::complex<double>(s * re, s * im);
    }
    return a;
}

arma::cx_mat assemble_channel(const PathSet& paths, const arma::cx_vec& amplitudes,
                              const UraGeometry& tx, const UraGeometry& rx)
{
    paths.validate();
    if (amplitudes.n_elem != paths.count())
        throw std::invalid_argument("assemble_channel: amplitude count mismatch");

    arma::cx_mat A_T = steering_matrix(tx, paths.aod_az, paths.aod_el);
    arma::cx_mat A_R = steering_matrix(rx, paths.aoa_az, paths.aoa_el);
    return A_R * arma::diagmat(amplitudes) * A_T.st();
}

arma::cx_mat compress_channel(const arma::cx_mat& H, const arma::cx_mat& F_RF,
                              const arma::cx_mat& W_RF)
{
    if (F_RF.n_rows != H.n_cols)
        throw std::invalid_argument("compress_channel: F_RF rows must match Tx antennas");
    if (W_RF.n_rows != H.n_rows)
        throw std::invalid_argument("compress_channel: W_RF rows must match Rx antennas");
    return W_RF.t() * H * F_RF;
}

arma::cx_mat path_signature_matrix(const PathSet& paths, const UraGeometry& tx,
                                   const UraGeometry& rx, const arma::cx_mat& F_RF,
                                   const arma::cx_mat& W_RF)
{
    paths.validate();
    arma::cx_mat C_T = F_RF.st() * steering_matrix(tx, paths.aod_az, paths.aod_el);
    arma::cx_mat B_R = W_RF.t() * steering_matrix(rx, paths.aoa_az, paths.aoa_el);
    return khatri_rao(C_T, B_R);
}

arma::cx_mat compressed_correlation(const PathSet& paths, const UraGeometry& tx,
                                    const UraGeometry& rx, const arma::cx_mat& F_RF,
                                    const arma::cx_mat& W_RF)
{
    arma::cx_mat T = path_signature_matrix(paths, tx, rx, F_RF, W_RF);
    return T * arma::diagmat(arma::conv_to<arma::cx_vec>::from(paths.powers)) * T.t();
}

SideCorrelations side_correlations(const PathSet& paths, const UraGeometry& tx,
                                   const UraGeometry& rx, const arma::cx_mat& F_RF,
                                   const arma::cx_mat& W_RF)
{
    paths.validate();
    arma::cx_mat C_T = F_RF.st() * steering_matrix(tx, paths.aod_az, paths.aod_el);
    arma::cx_mat B_R = W_RF.t() * steering_matrix(rx, paths.aoa_az, paths.aoa_el);

    SideCorrelations out;
    out.tx.zeros(C_T.n_rows, C_T.n_rows);
    out.rx.zeros(B_R.n_rows, B_R.n_rows);
    for (arma::uword p = 0; p < paths.count(); ++p)
    {
        const double gr = std::pow(arma::norm(B_R.col(p)), 2);
        const double gt = std::pow(arma::norm(C_T.col(p)), 2);
        out.tx += paths.powers(p) * gr * (arma::conj(C_T.col(p)) * C_T.col(p).st());
        out.rx += paths.powers(p) * gt * (B_R.col(p) * B_R.col(p).t());
    }
    return out;
}

DiversityOrders diversity_orders(const PathSet& paths, const UraGeometry& tx,
                                 const UraGeometry& rx, const arma::cx_mat* F_RF,
                                 const arma::cx_mat* W_RF)
{
    paths.validate();
    arma::cx_mat A_T = steering_matrix(tx, paths.aod_az, paths.aod_el);
    arma::cx_mat A_R = steering_matrix(rx, paths.aoa_az, paths.aoa_el);

    DiversityOrders d;
    d.tx = arma::rank(A_T);
    d.rx = arma::rank(A_R);
    d.joint = arma::rank(khatri_rao(A_T, A_R));

    if (F_RF != nullptr && W_RF != nullptr)
    {
        d.tx_compressed = arma::rank(F_RF->st() * A_T);
        d.rx_compressed = arma::rank(W_RF->t() * A_R);
        d.joint_compressed = arma::rank(path_signature_matrix(paths, tx, rx, *F_RF, *W_RF));
    }
    return d;
}

} // namespace mvlink
