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

#include "mvlink/estimation.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "mvlink/numerics.hpp"

namespace mvlink
{

namespace
{

constexpr double pi = 3.14159265358979323846;

arma::cx_mat standard_complex_gaussian(arma::uword n_rows, arma::uword n_cols,
                                       std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(2.0));
    arma::cx_mat X(n_rows, n_cols);
    for (arma::uword c = 0; c < n_cols; ++c)
        for (arma::uword r = 0; r < n_rows; ++r)
        {
            const double re = g(rng);
            const double im = g(rng);
            X(r, c) = {re, im};
        }
    return X;
}

// Percentile rank on a spectrum with the known whitened noise level removed;
// a spectrum with no energy above the floor degrades to rank 1.
arma::uword denoised_rank(const arma::vec& raw, double floor_level, double threshold)
{
    arma::vec denoised = arma::clamp(raw - floor_level, 0.0, arma::datum::inf);
    if (arma::accu(denoised) <= 0.0)
        return 1;
    return estimate_rank(denoised, threshold);
}

} // namespace

void TrainingBlock::validate() const
{
    if (pilots.n_rows == 0 || pilots.n_cols == 0)
        throw std::invalid_argument("TrainingBlock: empty pilot matrix");
    if (pilots.n_cols < pilots.n_rows)
        throw std::invalid_argument("TrainingBlock: fewer pilot symbols than Tx chains");
    if (received.n_cols != pilots.n_cols)
        throw std::invalid_argument("TrainingBlock: received/pilot symbol count mismatch");
    if (!(sigma_s > 0.0))
        throw std::invalid_argument("TrainingBlock: sigma_s must be positive");
    const arma::cx_mat gram = pilots * pilots.t();
    const arma::cx_mat target =
        sigma_s * sigma_s * arma::cx_mat(pilots.n_rows, pilots.n_rows, arma::fill::eye);
    if (arma::norm(gram - target, "fro") > 1e-10 * std::max(1.0, sigma_s * sigma_s) *
                                               std::sqrt(static_cast<double>(pilots.n_rows)))
        throw std::invalid_argument("TrainingBlock: pilot Gram is not sigma_s^2 I");
}

arma::cx_mat NoiseModel::covariance(arma::uword n_antennas) const
{
    if (Q_n.n_elem == 0)
        return sigma_n_sq * arma::cx_mat(n_antennas, n_antennas, arma::fill::eye);
    if (Q_n.n_rows != n_antennas || Q_n.n_cols != n_antennas)
        throw std::invalid_argument("NoiseModel: Q_n does not match the antenna count");
    return Q_n;
}

arma::cx_mat Whitener::whiten_matrix(const arma::cx_mat& Y) const
{
    if (Y.n_rows != n_rx_rf())
        throw std::invalid_argument("Whitener: row count mismatch");
    return sigma_s * (Q_inv_half * Y);
}

arma::cx_mat Whitener::dewhiten_matrix(const arma::cx_mat& Y) const
{
    if (Y.n_rows != n_rx_rf())
        throw std::invalid_argument("Whitener: row count mismatch");
    return (Q_half * Y) / sigma_s;
}

arma::cx_vec Whitener::whiten(const arma::cx_vec& h) const
{
    return vec(whiten_matrix(unvec(h, n_rx_rf(), n_tx_rf)));
}

arma::cx_vec Whitener::dewhiten(const arma::cx_vec& h) const
{
    return vec(dewhiten_matrix(unvec(h, n_rx_rf(), n_tx_rf)));
}

arma::cx_mat Whitener::C() const
{
    const arma::cx_mat eye_t(n_tx_rf, n_tx_rf, arma::fill::eye);
    return arma::kron(eye_t, Q_tilde) / (sigma_s * sigma_s);
}

arma::cx_mat Whitener::C_half() const
{
    const arma::cx_mat eye_t(n_tx_rf, n_tx_rf, arma::fill::eye);
    return arma::kron(eye_t, Q_half) / sigma_s;
}

arma::cx_mat Whitener::C_inv_half() const
{
    const arma::cx_mat eye_t(n_tx_rf, n_tx_rf, arma::fill::eye);
    return sigma_s * arma::kron(eye_t, Q_inv_half);
}

double Whitener::crlb() const
{
    return static_cast<double>(n_tx_rf) * arma::trace(Q_tilde).real() / (sigma_s * sigma_s);
}

arma::cx_mat SubspaceModel::projector_whitened() const
{
    if (kind == Kind::Joint)
        return U * U.t();
    return arma::kron(arma::conj(U_T) * U_T.st(), U_R * U_R.t());
}

arma::cx_mat SubspaceModel::projector() const
{
    return whitener.C_half() * projector_whitened() * whitener.C_inv_half();
}

arma::cx_vec SubspaceModel::apply(const arma::cx_vec& h) const
{
    if (h.n_elem != whitener.dim())
        throw std::invalid_argument("SubspaceModel: estimate length mismatch");
    if (kind == Kind::Joint)
    {
        const arma::cx_vec hw = whitener.whiten(h);
        return whitener.dewhiten(U * (U.t() * hw));
    }
    const arma::cx_mat Yw = whitener.whiten_matrix(unvec(h, whitener.n_rx_rf(), whitener.n_tx_rf));
    // Kronecker projector in matrix form: row space through conj(U_T), column
    // space through U_R.
    const arma::cx_mat proj = U_R * ((U_R.t() * Yw * U_T) * U_T.t());
    return vec(whitener.dewhiten_matrix(proj));
}

arma::cx_mat make_training(arma::uword n_tx_rf, arma::uword M, double sigma_s,
                           std::mt19937_64& rng)
{
    if (M < n_tx_rf)
        throw std::invalid_argument("make_training: need at least n_tx_rf pilot symbols");
    if (!(sigma_s > 0.0))
        throw std::invalid_argument("make_training: sigma_s must be positive");
    // rows of a unitary DFT are orthonormal; a random diagonal phase keeps
    // the Gram exact while decorrelating independent draws
    arma::cx_mat S = sigma_s * dft_matrix(M).head_rows(n_tx_rf);
    std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
    for (arma::uword m = 0; m < M; ++m)
        S.col(m) *= std::polar(1.0, u(rng));
    return S;
}

Whitener noise_after_bf(const NoiseModel& noise, const arma::cx_mat& W_RF, double sigma_s,
                        arma::uword n_tx_rf)
{
    if (!(sigma_s > 0.0))
        throw std::invalid_argument("noise_after_bf: sigma_s must be positive");
    if (noise.sigma_n_sq < 0.0)
        throw std::invalid_argument("noise_after_bf: negative noise power");
    const arma::cx_mat Q_n = noise.covariance(W_RF.n_rows);
    if (arma::norm(Q_n - Q_n.t(), "fro") > 1e-10 * std::max(1.0, arma::norm(Q_n, "fro")))
        throw std::invalid_argument("noise_after_bf: Q_n is not Hermitian");

    Whitener wh;
    wh.n_tx_rf = n_tx_rf;
    wh.sigma_s = sigma_s;
    wh.Q_tilde = W_RF.t() * Q_n * W_RF;
    wh.Q_tilde = 0.5 * (wh.Q_tilde + wh.Q_tilde.t()); // enforce exact Hermitian symmetry

    const arma::uword n = wh.Q_tilde.n_rows;
    const double scale = arma::norm(wh.Q_tilde, "fro");
    if (scale < 1e-300)
    {
        // noise-free operation: whitening degenerates to the identity map
        wh.Q_half.eye(n, n);
        wh.Q_inv_half.eye(n, n);
        wh.noise_floor = 0.0;
        return wh;
    }
    SqrtPair factors = inv_sqrt_hermitian(wh.Q_tilde); // throws if not PSD
    wh.Q_half = std::move(factors.half);
    wh.Q_inv_half = std::move(factors.inv_half);
    wh.noise_floor = 1.0;
    return wh;
}

TrainingBlock simulate_block(const arma::cx_mat& H_compressed, const arma::cx_mat& pilots,
                             const Whitener& whitener, std::mt19937_64& rng)
{
    if (H_compressed.n_rows != whitener.n_rx_rf() || H_compressed.n_cols != pilots.n_rows)
        throw std::invalid_argument("simulate_block: channel dims do not match pilots/whitener");
    TrainingBlock block;
    block.pilots = pilots;
    block.sigma_s = whitener.sigma_s;
    block.received = H_compressed * pilots;
    if (whitener.noise_floor > 0.0)
        block.received +=
            whitener.Q_half * standard_complex_gaussian(H_compressed.n_rows, pilots.n_cols, rng);
    return block;
}

arma::cx_vec uml_estimate(const TrainingBlock& block)
{
    block.validate();
    const arma::cx_mat gram = block.pilots * block.pilots.t();
    if (arma::rcond(gram) < 1e-12)
        throw std::invalid_argument("uml_estimate: singular pilot Gram");
    const arma::cx_mat num = block.received * block.pilots.t(); // Y S^H
    // X = num * gram^{-1}  <=>  X^T = gram^{-T} num^T
    const arma::cx_mat est = arma::solve(gram.st(), num.st(),
                                         arma::solve_opts::likely_sympd)
                                 .st();
    return vec(est);
}

arma::uword estimate_rank(const arma::vec& eigenvalues, double threshold)
{
    if (eigenvalues.n_elem == 0)
        throw std::invalid_argument("estimate_rank: empty spectrum");
    if (!(threshold > 0.0) || threshold > 1.0)
        throw std::invalid_argument("estimate_rank: threshold must be in (0, 1]");
    const double scale = std::max(eigenvalues.max(), 0.0);
    if (eigenvalues.min() < -1e-10 * std::max(scale, 1.0))
        throw std::invalid_argument("estimate_rank: significantly negative eigenvalue");
    arma::vec lam = arma::clamp(eigenvalues, 0.0, arma::datum::inf);
    const double total = arma::accu(lam);
    if (total <= 0.0)
        throw std::invalid_argument("estimate_rank: all-zero spectrum");
    double cum = 0.0;
    for (arma::uword r = 0; r < lam.n_elem; ++r)
    {
        cum += lam(r);
        if (cum >= threshold * total)
            return r + 1;
    }
    return lam.n_elem;
}

SubspaceModel fit_js(const std::vector<TrainingBlock>& blocks, const Whitener& whitener,
                     double rank_threshold, const MvRegion& region)
{
    if (blocks.empty())
        throw std::invalid_argument("fit_js: no training blocks");
    const arma::uword dim = whitener.dim();
    arma::cx_mat R(dim, dim, arma::fill::zeros);
    for (const TrainingBlock& block : blocks)
    {
        const arma::cx_vec yw = whitener.whiten(uml_estimate(block));
        R += yw * yw.t();
    }
    R /= static_cast<double>(blocks.size());

    EigResult eig = hermitian_eig(R);
    SubspaceModel model;
    model.kind = SubspaceModel::Kind::Joint;
    model.spectrum_joint = eig.values;
    model.r_hat = denoised_rank(eig.values, whitener.noise_floor, rank_threshold);
    model.U = eig.vectors.head_cols(model.r_hat);
    model.whitener = whitener;
    model.region = region;
    return model;
}

SubspaceModel fit_ds(const std::vector<TrainingBlock>& blocks, const Whitener& whitener,
                     double rank_threshold, const MvRegion& region)
{
    if (blocks.empty())
        throw std::invalid_argument("fit_ds: no training blocks");
    const arma::uword n_r = whitener.n_rx_rf();
    const arma::uword n_t = whitener.n_tx_rf;
    arma::cx_mat R_T(n_t, n_t, arma::fill::zeros);
    arma::cx_mat R_R(n_r, n_r, arma::fill::zeros);
    for (const TrainingBlock& block : blocks)
    {
        const arma::cx_mat Yw = whitener.whiten_matrix(unvec(uml_estimate(block), n_r, n_t));
        R_T += Yw.t() * Yw;
        R_R += Yw * Yw.t();
    }
    R_T /= static_cast<double>(blocks.size());
    R_R /= static_cast<double>(blocks.size());

    EigResult eig_t = hermitian_eig(R_T);
    EigResult eig_r = hermitian_eig(R_R);
    SubspaceModel model;
    model.kind = SubspaceModel::Kind::Disjoint;
    model.spectrum_tx = eig_t.values;
    model.spectrum_rx = eig_r.values;
    // whitened noise enters each side correlation with the opposite side's
    // dimension as its per-unit level
    model.r_hat_T =
        denoised_rank(eig_t.values, whitener.noise_floor * static_cast<double>(n_r), rank_threshold);
    model.r_hat_R =
        denoised_rank(eig_r.values, whitener.noise_floor * static_cast<double>(n_t), rank_threshold);
    model.r_hat = model.r_hat_T * model.r_hat_R;
    model.U_T = eig_t.vectors.head_cols(model.r_hat_T);
    model.U_R = eig_r.vectors.head_cols(model.r_hat_R);
    model.whitener = whitener;
    model.region = region;
    return model;
}

arma::cx_vec lr_estimate(const SubspaceModel& model, const TrainingBlock& block)
{
    return model.apply(uml_estimate(block));
}

} // namespace mvlink
