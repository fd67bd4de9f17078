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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include <armadillo>

#include "mvlink/arrays.hpp"
#include "mvlink/channel.hpp"
#include "mvlink/estimation.hpp"
#include "mvlink/link_metrics.hpp"
#include "mvlink/numerics.hpp"
#include "mvlink/rng.hpp"

namespace
{

using namespace mvlink;
using Catch::Approx;

arma::cx_mat random_cx_mat(std::mt19937_64& rng, arma::uword n_rows, arma::uword n_cols)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    arma::cx_mat out(n_rows, n_cols);
    for (arma::uword c = 0; c < n_cols; ++c)
    {
        for (arma::uword r = 0; r < n_rows; ++r)
        {
            const double re = normal(rng);
            const double im = normal(rng);
            out(r, c) = std::complex<double>(re, im);
        }
    }
    return out;
}

PathSet three_paths()
{
    PathSet paths;
    paths.aod_az = {-0.8, 0.1, 0.9};
    paths.aod_el = {0.05, -0.1, 0.15};
    paths.aoa_az = {0.7, -0.3, -1.1};
    paths.aoa_el = {-0.05, 0.1, 0.0};
    paths.powers = {0.5, 0.3, 0.2};
    return paths;
}

PathSet one_path()
{
    PathSet paths;
    paths.aod_az = {0.4};
    paths.aod_el = {0.05};
    paths.aoa_az = {-0.6};
    paths.aoa_el = {0.1};
    paths.powers = {1.0};
    return paths;
}

// Small hybrid test bed: 4x2 URAs on both sides, orthonormal codebook columns
// as analog stages, two Tx and four Rx chains.
struct LinkBed
{
    UraGeometry tx{4, 2, 0.5};
    UraGeometry rx{4, 2, 0.5};
    arma::cx_mat F; // 8 x 2
    arma::cx_mat W; // 8 x 4

    LinkBed()
    {
        const arma::cx_mat tx_cb = dft_codebook_2d(tx.n_az, tx.n_el, Codebook::Scope::FullArray).matrix;
        const arma::cx_mat rx_cb = dft_codebook_2d(rx.n_az, rx.n_el, Codebook::Scope::FullArray).matrix;
        F = tx_cb.cols(arma::uvec{0, 1});
        W = rx_cb.cols(arma::uvec{0, 1, 2, 3});
    }

    Whitener white_whitener(double sigma_n_sq) const
    {
        NoiseModel noise;
        noise.sigma_n_sq = sigma_n_sq;
        return noise_after_bf(noise, W, 1.0, F.n_cols);
    }

    Whitener colored_whitener() const
    {
        const arma::cx_mat V = dft_matrix(8);
        const arma::vec vals = arma::linspace(0.5, 2.0, 8);
        NoiseModel noise;
        noise.sigma_n_sq = 1.0;
        noise.Q_n = V * arma::diagmat(arma::conv_to<arma::cx_vec>::from(vals)) * V.t();
        return noise_after_bf(noise, W, 1.0, F.n_cols);
    }
};

} // namespace

TEST_CASE("digital precoder recovers dominant eigen directions", "[link_metrics]")
{
    SECTION("diagonal channel with one stream picks the strong column")
    {
        arma::cx_mat H(2, 2, arma::fill::zeros);
        H(0, 0) = 2.0;
        H(1, 1) = 1.0;
        const arma::cx_mat F_RF = arma::eye<arma::cx_mat>(2, 2);
        const PrecoderResult res = digital_precoder(H, F_RF, 1);
        REQUIRE_FALSE(res.rank_deficient);
        REQUIRE(std::abs(res.F_BB(0, 0) - std::complex<double>(1.0, 0.0)) < 1e-12);
        REQUIRE(std::abs(res.F_BB(1, 0)) < 1e-12);
    }

    SECTION("rank-one channel aligns with the right factor")
    {
        auto rng = make_rng(101, 1);
        const arma::cx_vec u = arma::normalise(arma::cx_vec(random_cx_mat(rng, 4, 1)));
        const arma::cx_vec v = arma::normalise(arma::cx_vec(random_cx_mat(rng, 3, 1)));
        const arma::cx_mat H = 3.0 * u * v.t();
        const arma::cx_mat F_RF = arma::eye<arma::cx_mat>(4, 3);

        const PrecoderResult res = digital_precoder(H, F_RF, 1);
        REQUIRE_FALSE(res.rank_deficient);
        const double fnorm = arma::norm(res.F_BB.col(0), 2);
        REQUIRE(fnorm == Approx(1.0).margin(1e-10));
        const double alignment = std::abs(arma::cdot(v, res.F_BB.col(0)));
        REQUIRE(alignment == Approx(1.0).margin(1e-10));

        // A second stream does not exist: zero-padded and flagged, power intact.
        const PrecoderResult two = digital_precoder(H, F_RF, 2);
        REQUIRE(two.rank_deficient);
        REQUIRE(arma::norm(two.F_BB.col(1), 2) == Approx(0.0).margin(1e-12));
        const double total = arma::norm(F_RF * two.F_BB, "fro");
        REQUIRE(total * total == Approx(2.0).epsilon(1e-10));
    }

    SECTION("two streams match the top right singular vectors")
    {
        auto rng = make_rng(101, 2);
        const arma::cx_mat H = random_cx_mat(rng, 4, 4);
        const arma::cx_mat F_RF = dft_matrix(4);

        const PrecoderResult res = digital_precoder(H, F_RF, 2);
        REQUIRE_FALSE(res.rank_deficient);

        const arma::cx_mat gram = res.F_BB.t() * res.F_BB;
        REQUIRE(arma::norm(gram - arma::eye<arma::cx_mat>(2, 2), "fro") < 1e-10);
        const double total = arma::norm(F_RF * res.F_BB, "fro");
        REQUIRE(total * total == Approx(2.0).epsilon(1e-10));

        arma::cx_mat U;
        arma::vec s;
        arma::cx_mat V;
        REQUIRE(arma::svd(U, s, V, H));
        for (arma::uword k = 0; k < 2; ++k)
        {
            const double align = std::abs(arma::cdot(V.col(k), res.F_BB.col(k)));
            REQUIRE(align == Approx(1.0).margin(1e-8));
        }
    }

    SECTION("zero channel is flagged with an all-zero precoder")
    {
        const arma::cx_mat H(3, 3, arma::fill::zeros);
        const arma::cx_mat F_RF = arma::eye<arma::cx_mat>(3, 3);
        const PrecoderResult res = digital_precoder(H, F_RF, 2);
        REQUIRE(res.rank_deficient);
        REQUIRE(arma::norm(res.F_BB, "fro") == Approx(0.0).margin(1e-14));
    }

    SECTION("contract violations throw")
    {
        const arma::cx_mat H = arma::eye<arma::cx_mat>(3, 3);
        const arma::cx_mat F_RF = arma::eye<arma::cx_mat>(4, 3);
        REQUIRE_THROWS_AS(digital_precoder(H, F_RF, 0), std::invalid_argument);
        REQUIRE_THROWS_AS(digital_precoder(H, F_RF, 4), std::invalid_argument);
        REQUIRE_THROWS_AS(digital_precoder(H, arma::eye<arma::cx_mat>(4, 2), 1),
                          std::invalid_argument);
    }
}

TEST_CASE("mmse combiner matches closed forms", "[link_metrics]")
{
    SECTION("scalar Wiener weight")
    {
        const std::complex<double> h(1.5, -0.5);
        const double sigma_sq = 0.3;
        arma::cx_mat H(1, 1);
        H(0, 0) = h;
        const arma::cx_mat F_BB = arma::eye<arma::cx_mat>(1, 1);
        arma::cx_mat Q(1, 1);
        Q(0, 0) = sigma_sq;

        const arma::cx_mat W = mmse_combiner(H, F_BB, Q, 1);
        const std::complex<double> expected = h / (std::norm(h) + sigma_sq);
        REQUIRE(std::abs(W(0, 0) - expected) < 1e-12);
    }

    SECTION("vanishing noise approaches the zero-forcing inverse")
    {
        auto rng = make_rng(101, 3);
        arma::cx_mat A = random_cx_mat(rng, 3, 3);
        A.diag() += 3.0;
        const arma::cx_mat Q = 1e-9 * arma::eye<arma::cx_mat>(3, 3);

        const arma::cx_mat W = mmse_combiner(A, arma::eye<arma::cx_mat>(3, 3), Q, 3);
        const arma::cx_mat product = W.t() * A;
        REQUIRE(arma::norm(product - arma::eye<arma::cx_mat>(3, 3), "fro") < 1e-5);
    }

    SECTION("combiner minimizes the quadratic stream-error objective")
    {
        auto rng = make_rng(101, 4);
        const arma::cx_mat H = random_cx_mat(rng, 4, 3);
        const arma::cx_mat F_RF = arma::eye<arma::cx_mat>(6, 3);
        const PrecoderResult pre = digital_precoder(H, F_RF, 2);
        const arma::cx_mat B = random_cx_mat(rng, 4, 4);
        const arma::cx_mat Q = B * B.t() + 0.5 * arma::eye<arma::cx_mat>(4, 4);

        const arma::cx_mat W_star = mmse_combiner(H, pre.F_BB, Q, 2);
        const arma::cx_mat A = H * pre.F_BB;
        const auto objective = [&](const arma::cx_mat& W) {
            const arma::cx_mat misfit = arma::eye<arma::cx_mat>(2, 2) - W.t() * A;
            const double fit = 2.0 * std::pow(arma::norm(misfit, "fro"), 2);
            const double noise = std::real(arma::trace(W.t() * Q * W));
            return fit + noise;
        };

        const double j_star = objective(W_star);
        for (int k = 0; k < 10; ++k)
        {
            const arma::cx_mat D = random_cx_mat(rng, 4, 2);
            REQUIRE(objective(W_star + 1e-3 * D) >= j_star - 1e-12);
        }
    }

    SECTION("singular noise covariance is rejected")
    {
        const arma::cx_mat H = arma::eye<arma::cx_mat>(2, 2);
        const arma::cx_mat F_BB = arma::eye<arma::cx_mat>(2, 2);
        const arma::cx_mat Q(2, 2, arma::fill::zeros);
        REQUIRE_THROWS_AS(mmse_combiner(H, F_BB, Q, 2), std::invalid_argument);
        REQUIRE_THROWS_AS(mmse_combiner(H, arma::eye<arma::cx_mat>(3, 2),
                                        arma::eye<arma::cx_mat>(2, 2), 2),
                          std::invalid_argument);
    }
}

TEST_CASE("spectral efficiency matches scalar and singular-pair oracles", "[link_metrics]")
{
    SECTION("scalar link reduces to the Shannon formula")
    {
        const std::complex<double> h(0.8, 1.1);
        const double sigma_sq = 0.4;
        arma::cx_mat H(1, 1);
        H(0, 0) = h;
        arma::cx_mat Q(1, 1);
        Q(0, 0) = sigma_sq;

        const LinkDesign design = design_link(H, arma::eye<arma::cx_mat>(1, 1), Q, 1);
        const double rate = spectral_efficiency(H, design, Q, 1);
        const double expected = std::log2(1.0 + std::norm(h) / sigma_sq);
        REQUIRE(rate == Approx(expected).epsilon(1e-9));
    }

    SECTION("perfect knowledge with white noise attains the top singular mode")
    {
        auto rng = make_rng(101, 5);
        const arma::cx_mat H = random_cx_mat(rng, 8, 4);
        const double sigma_sq = 0.25;
        const arma::cx_mat Q = sigma_sq * arma::eye<arma::cx_mat>(8, 8);
        const UraGeometry tx{4, 4, 0.5};
        const arma::cx_mat F_RF = dft_codebook_2d(tx.n_az, tx.n_el, Codebook::Scope::FullArray).matrix.cols(arma::uvec{0, 3, 7, 11});

        const LinkDesign design = design_link(H, F_RF, Q, 1);
        const double rate = spectral_efficiency(H, design, Q, 1);
        const arma::vec s = arma::svd(H);
        const double expected = std::log2(1.0 + s(0) * s(0) / sigma_sq);
        REQUIRE(rate == Approx(expected).epsilon(1e-9));

        // A design built from a perturbed channel cannot beat the matched one.
        for (int k = 0; k < 5; ++k)
        {
            const arma::cx_mat H_miss = H + 0.5 * random_cx_mat(rng, 8, 4);
            const LinkDesign miss = design_link(H_miss, F_RF, Q, 1);
            REQUIRE(spectral_efficiency(H, miss, Q, 1) <= rate + 1e-12);
        }
    }

    SECTION("zero channel scores zero under any design")
    {
        auto rng = make_rng(101, 6);
        const arma::cx_mat H_hat = random_cx_mat(rng, 4, 2);
        const arma::cx_mat Q = arma::eye<arma::cx_mat>(4, 4);
        const LinkDesign design = design_link(H_hat, arma::eye<arma::cx_mat>(2, 2), Q, 1);
        const arma::cx_mat H_zero(4, 2, arma::fill::zeros);
        REQUIRE(spectral_efficiency(H_zero, design, Q, 1) == 0.0);
    }

    SECTION("contract violations throw")
    {
        auto rng = make_rng(101, 7);
        const arma::cx_mat H = random_cx_mat(rng, 4, 2);
        const arma::cx_mat Q = arma::eye<arma::cx_mat>(4, 4);
        const LinkDesign design = design_link(H, arma::eye<arma::cx_mat>(2, 2), Q, 1);
        REQUIRE_THROWS_AS(spectral_efficiency(H, design, arma::eye<arma::cx_mat>(3, 3), 1),
                          std::invalid_argument);
        const arma::cx_mat Q_zero(4, 4, arma::fill::zeros);
        REQUIRE_THROWS_AS(spectral_efficiency(H, design, Q_zero, 1), std::invalid_argument);
    }
}

TEST_CASE("squared error accumulates exactly", "[link_metrics]")
{
    arma::cx_vec a(3, arma::fill::zeros);
    arma::cx_vec b(3, arma::fill::zeros);
    REQUIRE(mse(a, b) == 0.0);

    b(0) = std::complex<double>(3.0, 0.0);
    b(2) = std::complex<double>(0.0, -4.0);
    REQUIRE(mse(a, b) == Approx(25.0).epsilon(1e-14));

    arma::cx_vec c(2, arma::fill::zeros);
    REQUIRE_THROWS_AS(mse(a, c), std::invalid_argument);
}

TEST_CASE("analytic subspaces expose the true ranks", "[link_metrics]")
{
    const LinkBed bed;
    const Whitener wh = bed.white_whitener(0.25);
    const BoundContext ctx =
        analytic_subspaces(three_paths(), bed.tx, bed.rx, bed.F, bed.W, wh);

    // Three separated paths: two Tx chains saturate, four Rx chains do not.
    REQUIRE(ctx.r_joint == 3);
    REQUIRE(ctx.r_T == 2);
    REQUIRE(ctx.r_R == 3);
    REQUIRE(ctx.M.n_rows == 8);
    REQUIRE(ctx.C.n_rows == 8);

    const BoundContext single =
        analytic_subspaces(one_path(), bed.tx, bed.rx, bed.F, bed.W, wh);
    REQUIRE(single.r_joint == 1);
    REQUIRE(single.r_T == 1);
    REQUIRE(single.r_R == 1);

    REQUIRE_THROWS_AS(analytic_subspaces(three_paths(), bed.tx, bed.rx, bed.F.head_rows(4),
                                         bed.W, wh),
                      std::invalid_argument);
}

TEST_CASE("error bound reproduces white-noise closed forms", "[link_metrics]")
{
    const LinkBed bed;
    const double sigma_n_sq = 0.25;
    const Whitener wh = bed.white_whitener(sigma_n_sq);
    const double crlb = wh.crlb();
    REQUIRE(crlb == Approx(2.0 * 4.0 * sigma_n_sq).epsilon(1e-12));

    const BoundContext ctx =
        analytic_subspaces(three_paths(), bed.tx, bed.rx, bed.F, bed.W, wh);

    // At the true rank the defect vanishes and the floor is (r/dim) of the
    // full error budget under white noise.
    const double at_true = mse_bound_js(ctx, ctx.r_joint);
    REQUIRE(at_true == Approx(crlb * 3.0 / 8.0).epsilon(1e-10));

    // Full rank reproduces the unconstrained error budget exactly.
    REQUIRE(mse_bound_js(ctx, 8) == Approx(crlb).epsilon(1e-10));

    // Overshooting the true rank only adds noise floor, never defect.
    const double at_five = mse_bound_js(ctx, 5);
    REQUIRE(at_five == Approx(crlb * 5.0 / 8.0).epsilon(1e-10));

    // Undershooting adds a strictly positive defect on top of the floor.
    const double at_one = mse_bound_js(ctx, 1);
    REQUIRE(at_one > crlb * 1.0 / 8.0 + 1e-6);

    const BoundContext single =
        analytic_subspaces(one_path(), bed.tx, bed.rx, bed.F, bed.W, wh);
    REQUIRE(mse_bound_js(single, 1) == Approx(crlb / 8.0).epsilon(1e-10));

    SECTION("disjoint truncation mirrors the Kronecker structure")
    {
        const double ds_true = mse_bound_ds(ctx, ctx.r_T, ctx.r_R);
        REQUIRE(ds_true ==
                Approx(crlb * static_cast<double>(ctx.r_T * ctx.r_R) / 8.0).epsilon(1e-10));
        const double ds_small = mse_bound_ds(ctx, 1, 1);
        REQUIRE(ds_small > crlb / 8.0 + 1e-6);
    }

    SECTION("rank bounds are enforced")
    {
        REQUIRE_THROWS_AS(mse_bound_js(ctx, 0), std::invalid_argument);
        REQUIRE_THROWS_AS(mse_bound_js(ctx, 9), std::invalid_argument);
        REQUIRE_THROWS_AS(mse_bound_ds(ctx, 0, 1), std::invalid_argument);
        REQUIRE_THROWS_AS(mse_bound_ds(ctx, 3, 5), std::invalid_argument);
    }
}

TEST_CASE("error bound matches a brute-force evaluation under colored noise", "[link_metrics]")
{
    const LinkBed bed;
    const Whitener wh = bed.colored_whitener();
    const BoundContext ctx =
        analytic_subspaces(three_paths(), bed.tx, bed.rx, bed.F, bed.W, wh);

    const arma::cx_mat C = wh.C();
    const arma::cx_mat C_half = wh.C_half();
    const arma::cx_mat C_inv_half = wh.C_inv_half();
    const arma::cx_mat R_raw = C_half * ctx.M * C_half; // de-whitened correlation

    const auto brute = [&](arma::uword r_hat) {
        const arma::cx_mat U_hat = ctx.U_joint.head_cols(r_hat);
        const arma::cx_mat U_true = ctx.U_joint.head_cols(ctx.r_joint);
        const arma::cx_mat P_hat = C_half * (U_hat * U_hat.t()) * C_inv_half;
        const arma::cx_mat P_true = C_half * (U_true * U_true.t()) * C_inv_half;
        const arma::cx_mat D = P_true - P_hat;
        const double floor_term = std::real(arma::trace(P_hat * C * P_hat.t()));
        const double defect_term = std::real(arma::trace(D * R_raw * D.t()));
        return floor_term + defect_term;
    };

    for (const arma::uword r_hat : {arma::uword(1), arma::uword(2), arma::uword(3),
                                    arma::uword(5), arma::uword(8)})
    {
        const double fast = mse_bound_js(ctx, r_hat);
        const double slow = brute(r_hat);
        REQUIRE(fast == Approx(slow).epsilon(1e-8));
    }

    // Disjoint-space variant against the same brute-force identity.
    const auto brute_ds = [&](arma::uword r_T, arma::uword r_R) {
        const arma::cx_mat UT = ctx.U_T.head_cols(r_T);
        const arma::cx_mat UR = ctx.U_R.head_cols(r_R);
        const arma::cx_mat P_w = arma::kron(arma::conj(UT * UT.t()), UR * UR.t());
        const arma::cx_mat UT_true = ctx.U_T.head_cols(ctx.r_T);
        const arma::cx_mat UR_true = ctx.U_R.head_cols(ctx.r_R);
        const arma::cx_mat P_w_true =
            arma::kron(arma::conj(UT_true * UT_true.t()), UR_true * UR_true.t());
        const arma::cx_mat P_hat = C_half * P_w * C_inv_half;
        const arma::cx_mat P_true = C_half * P_w_true * C_inv_half;
        const arma::cx_mat D = P_true - P_hat;
        return std::real(arma::trace(P_hat * C * P_hat.t())) +
               std::real(arma::trace(D * R_raw * D.t()));
    };

    REQUIRE(mse_bound_ds(ctx, 1, 1) == Approx(brute_ds(1, 1)).epsilon(1e-8));
    REQUIRE(mse_bound_ds(ctx, 2, 3) == Approx(brute_ds(2, 3)).epsilon(1e-8));
    REQUIRE(mse_bound_ds(ctx, 2, 4) == Approx(brute_ds(2, 4)).epsilon(1e-8));
}
