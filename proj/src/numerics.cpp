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

#include "mvlink/numerics.hpp"

#include <complex>
#include <stdexcept>

namespace mvlink
{

EigResult hermitian_eig(const arma::cx_mat& A)
{
    if (!A.is_square())
        throw std::invalid_argument("hermitian_eig: matrix must be square");

    const double nrm = arma::norm(A, "fro");
    if (arma::norm(A - A.t(), "fro") > 1e-10 * std::max(nrm, 1e-300))
        throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");

    arma::cx_mat As = 0.5 * (A + A.t());
    arma::vec val;
    arma::cx_mat vec;
    if (!arma::eig_sym(val, vec, As)) // ascending order
        throw std::runtime_error("hermitian_eig: eigendecomposition failed to converge");

    const arma::uword n = A.n_rows;
    EigResult out;
    out.values.set_size(n);
    out.vectors.set_size(n, n);
    for (arma::uword i = 0; i < n; ++i)
    {
        out.values(i) = val(n - 1 - i);
        arma::cx_vec v = vec.col(n - 1 - i);

        arma::uword k = 0; // first index of the largest-magnitude entry
        double best = -1.0;
        for (arma::uword j = 0; j < n; ++j)
            if (std::abs(v(j)) > best + 1e-15)
            {
                best = std::abs(v(j));
                k = j;
            }
        const std::complex<double> ph = v(k) / std::abs(v(k));
        out.vectors.col(i) = v / ph;
    }
    return out;
}

SqrtPair inv_sqrt_hermitian(const arma::cx_mat& A, double ridge)
{
    EigResult e = hermitian_eig(A);
    const double lmax = e.values.n_elem > 0 ? std::max(e.values(0), 0.0) : 0.0;
    if (e.values.n_elem > 0 && e.values.min() < -1e-10 * std::max(lmax, 1e-300))
        throw std::invalid_argument("inv_sqrt_hermitian: matrix is not positive semidefinite");

    if (ridge < 0.0)
        ridge = 1e-12 * lmax;

    arma::vec s_half(e.values.n_elem), s_inv(e.values.n_elem);
    for (arma::uword i = 0; i < e.values.n_elem; ++i)
    {
        const double lam = std::max(e.values(i), 0.0) + ridge;
        s_half(i) = std::sqrt(lam);
        s_inv(i) = lam > 0.0 ? 1.0 / std::sqrt(lam) : 0.0;
    }

    SqrtPair out;
    out.half = e.vectors * arma::diagmat(s_half) * e.vectors.t();
    out.inv_half = e.vectors * arma::diagmat(s_inv) * e.vectors.t();
    return out;
}

arma::cx_mat pseudo_inverse(const arma::cx_mat& A)
{
    if (A.n_elem == 0)
        throw std::invalid_argument("pseudo_inverse: empty matrix");

    arma::cx_mat U, V;
    arma::vec s;
    if (!arma::svd_econ(U, s, V, A))
        throw std::runtime_error("pseudo_inverse: SVD failed to converge");

    const double smax = s.n_elem > 0 ? s.max() : 0.0;
    const double tol = static_cast<double>(std::max(A.n_rows, A.n_cols)) *
                       std::numeric_limits<double>::epsilon() * smax;

    arma::vec s_inv(s.n_elem, arma::fill::zeros);
    for (arma::uword i = 0; i < s.n_elem; ++i)
        if (s(i) > tol)
            s_inv(i) = 1.0 / s(i);

    return V * arma::diagmat(s_inv) * U.t();
}

arma::cx_mat khatri_rao(const arma::cx_mat& A, const arma::cx_mat& B)
{
    if (A.n_cols != B.n_cols)
        throw std::invalid_argument("khatri_rao: column counts differ");

    arma::cx_mat out(A.n_rows * B.n_rows, A.n_cols);
    for (arma::uword p = 0; p < A.n_cols; ++p)
        out.col(p) = arma::kron(A.col(p), B.col(p));
    return out;
}

arma::cx_vec vec(const arma::cx_mat& A)
{
    return arma::vectorise(A);
}

arma::cx_mat unvec(const arma::cx_vec& v, arma::uword n_rows, arma::uword n_cols)
{
    if (v.n_elem != n_rows * n_cols)
        throw std::invalid_argument("unvec: length does not match target shape");
    return arma::reshape(v, n_rows, n_cols);
}

} // namespace mvlink
