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

namespace mvlink
{

struct EigResult
{
    arma::vec values;    // descending
    arma::cx_mat vectors; // orthonormal columns, phase-fixed
};

// Eigendecomposition of a Hermitian matrix. Eigenvalues are returned in
// descending order; each eigenvector is rotated so that its largest-magnitude
// entry (first such index on ties) is real and nonnegative.
// Throws std::invalid_argument if A is not square or not Hermitian to
// 1e-10 relative Frobenius tolerance; std::runtime_error on LAPACK failure.
EigResult hermitian_eig(const arma::cx_mat& A);

struct SqrtPair
{
    arma::cx_mat half;     // A^{1/2}, Hermitian
    arma::cx_mat inv_half; // A^{-1/2} on the numerical range of A
};

// Hermitian square root and inverse square root of a PSD matrix.
// ridge >= 0 is added to the (zero-clipped) eigenvalues before the square
// roots are formed; ridge < 0 selects the default 1e-12 * lambda_max.
// Eigenvalues below -1e-10 * lambda_max cause std::invalid_argument.
SqrtPair inv_sqrt_hermitian(const arma::cx_mat& A, double ridge = -1.0);

// Moore-Penrose pseudo-inverse via SVD with singular values below
// max(m, n) * eps * sigma_max treated as zero.
arma::cx_mat pseudo_inverse(const arma::cx_mat& A);

// Column-wise Kronecker product: column p of the result is
// kron(A.col(p), B.col(p)). A and B must have the same number of columns.
arma::cx_mat khatri_rao(const arma::cx_mat& A, const arma::cx_mat& B);

// Column-stacking vectorization and its inverse.
arma::cx_vec vec(const arma::cx_mat& A);
arma::cx_mat unvec(const arma::cx_vec& v, arma::uword n_rows, arma::uword n_cols);

} // namespace mvlink
