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

#include "mvlink/link_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvlink/numerics.hpp"

namespace mvlink
{

namespace
{

arma::cx_mat hermitian_part(const arma::cx_mat& A)
{
    return 0.5 * (A + A.t());
}

// Orthogonal projector onto the leading r columns of a full eigenbasis.
arma::cx_mat leading_projector(const arma::cx_mat& U, arma::uword r)
{
    if (r == 0)
    {
        return arma::cx_mat(U.n_rows, U.n_rows, arma::fill::zeros);
    }
    const arma::cx_mat Ur = U.head_cols(r);
    return Ur * Ur.t();
}

// Disjoint-space whitened projector from truncated side bases. The Tx factor
// acts on the conjugate beam space, hence the conjugated Kronecker block.
arma::cx_mat ds_projector(const arma::cx_mat& U_T, arma::uword r_T, const arma::cx_mat& U_R,
                          arma::uword r_R)
{
    const arma::cx_mat P_T = leading_projector(U_T, r_T);
    const arma::cx_mat P_R = leading_projector(U_R, r_R);
    return arma::kron(arma::conj(P_T), P_R);
}

double real_trace(const arma::cx_mat& A)
{
    return std::real(arma::trace(A));
}

arma::uword tolerance_rank(const arma::vec& eigenvalues, arma::uword dim)
{
    if (eigenvalues.empty())
    {
        return 0;
    }
    const double lam_max = eigenvalues.max();
    if (!(lam_max > 0.0))
    {
        return 0;
    }
    const double tol =
        static_cast<double>(dim) * std::numeric_limits<double>::epsilon() * lam_max;
    return static_cast<arma::uword>(arma::sum(eigenvalues > tol));
}

} // namespace

PrecoderResult digital_precoder(const arma::cx_mat& H_hat, const arma::cx_mat& F_RF,
                                arma::uword n_streams)
{
    if (H_hat.empty() || F_RF.empty())
    {
        throw std::invalid_argument("digital_precoder: empty input matrix");
    }
    if (F_RF.n_cols != H_hat.n_cols)
    {
        throw std::invalid_argument("digital_precoder: F_RF columns must match H_hat columns");
    }
    if (n_streams == 0 || n_streams > H_hat.n_cols)
    {
        throw std::invalid_argument("digital_precoder: n_streams out of range");
    }

    const arma::cx_mat G = hermitian_part(H_hat.t() * H_hat);
    const EigResult eig = hermitian_eig(G);
    const arma::uword rank = tolerance_rank(eig.values, G.n_rows);
    const arma::uword n_active = std::min<arma::uword>(n_streams, rank);

    PrecoderResult result;
    result.F_BB = arma::cx_mat(H_hat.n_cols, n_streams, arma::fill::zeros);
    result.rank_deficient = n_active < n_streams;
    if (n_active == 0)
    {
        return result;
    }
    result.F_BB.head_cols(n_active) = eig.vectors.head_cols(n_active);

    const double norm = arma::norm(F_RF * result.F_BB, "fro");
    if (norm <= 0.0)
    {
        throw std::runtime_error("digital_precoder: analog stage annihilates the precoder");
    }
    result.F_BB *= std::sqrt(static_cast<double>(n_streams)) / norm;
    return result;
}

arma::cx_mat mmse_combiner(const arma::cx_mat& H_hat, const arma::cx_mat& F_BB,
                           const arma::cx_mat& Q_tilde, arma::uword n_streams)
{
    if (H_hat.empty() || F_BB.empty())
    {
        throw std::invalid_argument("mmse_combiner: empty input matrix");
    }
    if (F_BB.n_rows != H_hat.n_cols)
    {
        throw std::invalid_argument("mmse_combiner: F_BB rows must match H_hat columns");
    }
    if (F_BB.n_cols != n_streams || n_streams == 0)
    {
        throw std::invalid_argument("mmse_combiner: F_BB must have n_streams columns");
    }
    if (!Q_tilde.is_square() || Q_tilde.n_rows != H_hat.n_rows)
    {
        throw std::invalid_argument("mmse_combiner: Q_tilde must be square over the Rx chains");
    }
    if (arma::rcond(Q_tilde) < 1e-12)
    {
        throw std::invalid_argument("mmse_combiner: singular noise covariance");
    }

    const arma::cx_mat A = H_hat * F_BB; // n_rx_rf x n_streams
    const arma::cx_mat Qi_A = arma::solve(hermitian_part(Q_tilde), A, arma::solve_opts::likely_sympd);
    arma::cx_mat G = A.t() * Qi_A;
    G = hermitian_part(G);
    G.diag() += 1.0 / static_cast<double>(n_streams);
    // W_BB^H = G^{-1} (Q^{-1} A)^H, so W_BB = Q^{-1} A G^{-1} with G Hermitian.
    const arma::cx_mat W_BB = arma::solve(G, Qi_A.t(), arma::solve_opts::likely_sympd).t();
    return W_BB;
}

LinkDesign design_link(const arma::cx_mat& H_hat, const arma::cx_mat& F_RF,
                       const arma::cx_mat& Q_tilde, arma::uword n_streams)
{
    LinkDesign design;
    const PrecoderResult precoder = digital_precoder(H_hat, F_RF, n_streams);
    design.F_BB = precoder.F_BB;
    design.rank_deficient = precoder.rank_deficient;
    design.W_BB = mmse_combiner(H_hat, design.F_BB, Q_tilde, n_streams);
    return design;
}

double spectral_efficiency(const arma::cx_mat& H_true, const LinkDesign& design,
                           const arma::cx_mat& Q_tilde, arma::uword n_streams)
{
    if (n_streams == 0)
    {
        throw std::invalid_argument("spectral_efficiency: n_streams must be positive");
    }
    if (design.F_BB.n_cols != n_streams || design.W_BB.n_cols != n_streams)
    {
        throw std::invalid_argument("spectral_efficiency: design streams mismatch");
    }
    if (design.F_BB.n_rows != H_true.n_cols || design.W_BB.n_rows != H_true.n_rows)
    {
        throw std::invalid_argument("spectral_efficiency: design incompatible with channel");
    }
    if (!Q_tilde.is_square() || Q_tilde.n_rows != H_true.n_rows)
    {
        throw std::invalid_argument("spectral_efficiency: Q_tilde must be square over the Rx chains");
    }

    const arma::cx_mat H_eff = design.W_BB.t() * H_true * design.F_BB;
    if (arma::norm(H_eff, "fro") == 0.0)
    {
        return 0.0;
    }

    arma::cx_mat Q_eff = hermitian_part(design.W_BB.t() * Q_tilde * design.W_BB);
    const double q_trace = real_trace(Q_eff);
    if (!(q_trace > 0.0))
    {
        throw std::invalid_argument("spectral_efficiency: effective noise covariance vanishes");
    }
    Q_eff.diag() += 1e-12 * q_trace / static_cast<double>(n_streams);

    const arma::cx_mat S =
        hermitian_part(Q_eff + (1.0 / static_cast<double>(n_streams)) * (H_eff * H_eff.t()));
    const double log_det_signal = arma::log_det_sympd(S);
    const double log_det_noise = arma::log_det_sympd(Q_eff);
    const double rate = (log_det_signal - log_det_noise) / std::log(2.0);
    return std::max(0.0, rate);
}

double mse(const arma::cx_vec& h_hat, const arma::cx_vec& h_true)
{
    if (h_hat.n_elem != h_true.n_elem)
    {
        throw std::invalid_argument("mse: vector lengths differ");
    }
    const double err = arma::norm(h_hat - h_true, 2);
    return err * err;
}

BoundContext analytic_subspaces(const PathSet& paths, const UraGeometry& tx,
                                const UraGeometry& rx, const arma::cx_mat& F_RF,
                                const arma::cx_mat& W_RF, const Whitener& whitener)
{
    paths.validate();
    if (F_RF.n_rows != tx.total())
    {
        throw std::invalid_argument("analytic_subspaces: F_RF rows must match Tx antennas");
    }
    if (W_RF.n_rows != rx.total())
    {
        throw std::invalid_argument("analytic_subspaces: W_RF rows must match Rx antennas");
    }
    if (F_RF.n_cols != whitener.n_tx_rf || W_RF.n_cols != whitener.n_rx_rf())
    {
        throw std::invalid_argument("analytic_subspaces: analog stages mismatch the whitener");
    }

    const arma::cx_mat A_T = steering_matrix(tx, paths.aod_az, paths.aod_el);
    const arma::cx_mat A_R = steering_matrix(rx, paths.aoa_az, paths.aoa_el);
    const arma::cx_mat B = F_RF.st() * A_T;                          // n_tx_rf x P
    const arma::cx_mat Cw = whitener.whiten_matrix(W_RF.t() * A_R);  // n_rx_rf x P

    const arma::uword n_t = B.n_rows;
    const arma::uword n_r = Cw.n_rows;

    arma::cx_mat M_T(n_t, n_t, arma::fill::zeros);
    arma::cx_mat M_R(n_r, n_r, arma::fill::zeros);
    for (arma::uword p = 0; p < paths.count(); ++p)
    {
        const arma::cx_vec b = B.col(p);
        const arma::cx_vec c = Cw.col(p);
        const double g_rx = std::pow(arma::norm(c, 2), 2);
        const double g_tx = std::pow(arma::norm(b, 2), 2);
        M_T += paths.powers(p) * g_rx * (arma::conj(b) * b.st());
        M_R += paths.powers(p) * g_tx * (c * c.t());
    }

    const arma::cx_mat T_w = khatri_rao(B, Cw);
    const arma::cx_mat M = hermitian_part(T_w * arma::diagmat(arma::cx_vec(
                                                    arma::conv_to<arma::cx_vec>::from(paths.powers))) *
                                          T_w.t());

    BoundContext ctx;
    const EigResult eig_joint = hermitian_eig(M);
    const EigResult eig_tx = hermitian_eig(hermitian_part(M_T));
    const EigResult eig_rx = hermitian_eig(hermitian_part(M_R));
    ctx.U_joint = eig_joint.vectors;
    ctx.U_T = eig_tx.vectors;
    ctx.U_R = eig_rx.vectors;
    ctx.r_joint = tolerance_rank(eig_joint.values, M.n_rows);
    ctx.r_T = tolerance_rank(eig_tx.values, n_t);
    ctx.r_R = tolerance_rank(eig_rx.values, n_r);
    ctx.M = M;
    ctx.C = whitener.C();
    return ctx;
}

namespace
{

double bound_from_projectors(const BoundContext& ctx, const arma::cx_mat& P_hat,
                             const arma::cx_mat& P_true)
{
    const double floor_term = std::max(0.0, real_trace(P_hat * ctx.C));
    const arma::cx_mat D = P_true - P_hat;
    if (arma::norm(D, "fro") == 0.0)
    {
        return floor_term;
    }
    const double defect_term = std::max(0.0, real_trace(D * ctx.M * D * ctx.C));
    return floor_term + defect_term;
}

} // namespace

double mse_bound_js(const BoundContext& ctx, arma::uword r_hat)
{
    const arma::uword dim = ctx.U_joint.n_rows;
    if (r_hat == 0 || r_hat > dim)
    {
        throw std::invalid_argument("mse_bound_js: rank out of range");
    }
    const arma::cx_mat P_hat = leading_projector(ctx.U_joint, r_hat);
    const arma::cx_mat P_true = leading_projector(ctx.U_joint, ctx.r_joint);
    return bound_from_projectors(ctx, P_hat, P_true);
}

double mse_bound_ds(const BoundContext& ctx, arma::uword r_hat_T, arma::uword r_hat_R)
{
    if (r_hat_T == 0 || r_hat_T > ctx.U_T.n_rows)
    {
        throw std::invalid_argument("mse_bound_ds: Tx rank out of range");
    }
    if (r_hat_R == 0 || r_hat_R > ctx.U_R.n_rows)
    {
        throw std::invalid_argument("mse_bound_ds: Rx rank out of range");
    }
    const arma::cx_mat P_hat = ds_projector(ctx.U_T, r_hat_T, ctx.U_R, r_hat_R);
    const arma::cx_mat P_true = ds_projector(ctx.U_T, ctx.r_T, ctx.U_R, ctx.r_R);
    return bound_from_projectors(ctx, P_hat, P_true);
}

} // namespace mvlink
