// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace cran
{
    using cplx = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RMatrix = Eigen::MatrixXd;
    using RVector = Eigen::VectorXd;

    // Pseudo-random engine used everywhere. Independent streams are derived from
    // a (seed, index...) tuple so that parallel and serial callers agree.
    using Rng = std::mt19937_64;

    inline Rng make_rng(std::uint64_t seed)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
        return Rng(seq);
    }

    inline Rng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                          0x9e3779b9u};
        return Rng(seq);
    }

    // Matrix of i.i.d. CN(0, 1) entries
    inline CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng &rng)
    {
        std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
        CMatrix g(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r)
            {
                const double re = normal(rng);
                const double im = normal(rng);
                g(r, c) = cplx(re, im);
            }
        return g;
    }

    // Principal square root of a Hermitian PSD matrix. Eigenvalues below
    // -tolerance * max|lambda| are rejected, smaller negatives are clamped to 0.
    inline CMatrix hermitian_sqrt(const CMatrix &a, double tolerance = 1e-12)
    {
        if (a.rows() != a.cols())
            throw std::invalid_argument("hermitian_sqrt: matrix must be square.");
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(a);
        if (eig.info() != Eigen::Success)
            throw std::runtime_error("hermitian_sqrt: eigendecomposition failed.");
        RVector lambda = eig.eigenvalues();
        const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < lambda.size(); ++i)
        {
            if (lambda(i) < -tolerance * scale * static_cast<double>(lambda.size()))
                throw std::domain_error("hermitian_sqrt: matrix is not positive semi-definite.");
            lambda(i) = std::sqrt(std::max(lambda(i), 0.0));
        }
        const CMatrix &q = eig.eigenvectors();
        return q * lambda.cast<cplx>().asDiagonal() * q.adjoint();
    }

    inline double relative_frobenius(const CMatrix &value, const CMatrix &reference)
    {
        const double denom = reference.norm();
        const double diff = (value - reference).norm();
        return denom > 0.0 ? diff / denom : diff;
    }

    inline bool is_hermitian(const CMatrix &a, double tolerance = 1e-12)
    {
        if (a.rows() != a.cols())
            return false;
        return (a - a.adjoint()).norm() <= tolerance * std::max(1.0, a.norm());
    }

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace cran
