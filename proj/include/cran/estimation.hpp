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

// MMSE channel estimation for both layers. Covariances are handled per column:
// the Kronecker operators are block diagonal, each block depending only on the
// pilot receive power of its own column.

#include "channel.hpp"

#include <numbers>

namespace cran
{
    struct ColumnCovariance
    {
        CMatrix estimate; // Psi_hat
        CMatrix error;    // Psi_tilde
    };

    namespace detail
    {
        inline void check_pilot_power(double p, const char *who)
        {
            if (!(p > 0.0))
                throw std::domain_error(std::string(who) + ": pilot receive power must be positive.");
        }

        // C (C + s I)^{-1} C and its complement C - that
        inline ColumnCovariance mmse_split(const CMatrix &c, double s)
        {
            ColumnCovariance out;
            if (s == 0.0)
                out.estimate = c;
            else
            {
                const CMatrix shifted = c + s * CMatrix::Identity(c.rows(), c.cols());
                out.estimate = c * shifted.ldlt().solve(c);
                out.estimate = 0.5 * (out.estimate + out.estimate.adjoint()).eval();
            }
            out.error = c - out.estimate;
            return out;
        }
    } // namespace detail

    // Access link, one UD column: Psi_hat = R (noise/p I + R)^{-1} R
    inline ColumnCovariance access_cov(const RMatrix &corr, double p_pilot_rx, double noise)
    {
        detail::check_pilot_power(p_pilot_rx, "access_cov");
        if (!(noise >= 0.0))
            throw std::domain_error("access_cov: noise variance must be nonnegative.");
        return detail::mmse_split(corr.cast<cplx>(), noise / p_pilot_rx);
    }

    // Fronthaul, one stream column: only the scatter zeta H_r is estimated.
    inline ColumnCovariance fronthaul_cov(const RMatrix &corr, double zeta, double p_pilot_rx, double noise)
    {
        detail::check_pilot_power(p_pilot_rx, "fronthaul_cov");
        if (!(noise >= 0.0))
            throw std::domain_error("fronthaul_cov: noise variance must be nonnegative.");
        const CMatrix c = (zeta * zeta) * corr.cast<cplx>();
        if (zeta == 0.0)
            return {c, c};
        return detail::mmse_split(c, noise / p_pilot_rx);
    }

    // ---------- Spectral form ----------

    // Eigenbasis of a real correlation matrix. Every per-column covariance is a
    // function of the same matrix and is therefore diagonal in this basis.
    struct SpectralBasis
    {
        RVector values;  // ascending
        RMatrix vectors; // orthonormal columns

        explicit SpectralBasis(const RMatrix &corr)
        {
            Eigen::SelfAdjointEigenSolver<RMatrix> eig(corr);
            if (eig.info() != Eigen::Success)
                throw std::runtime_error("SpectralBasis: eigendecomposition failed.");
            values = eig.eigenvalues().cwiseMax(0.0);
            vectors = eig.eigenvectors();
        }

        int size() const { return static_cast<int>(values.size()); }
    };

    // Eigenvalues of Psi_hat and Psi_tilde for prior spectrum `prior` and s = noise / p
    struct ColumnSpectrum
    {
        RVector estimate;
        RVector error;

        static ColumnSpectrum from_prior(const RVector &prior, double s)
        {
            ColumnSpectrum out;
            if (s == 0.0)
                out.estimate = prior;
            else
                out.estimate = prior.array().square() / (prior.array() + s);
            out.error = prior - out.estimate;
            return out;
        }

        CMatrix estimate_matrix(const SpectralBasis &basis) const
        {
            return (basis.vectors * estimate.asDiagonal() * basis.vectors.transpose()).cast<cplx>();
        }
        CMatrix error_matrix(const SpectralBasis &basis) const
        {
            return (basis.vectors * error.asDiagonal() * basis.vectors.transpose()).cast<cplx>();
        }
    };

    inline ColumnSpectrum access_spectrum(const SpectralBasis &basis, double p_pilot_rx, double noise)
    {
        detail::check_pilot_power(p_pilot_rx, "access_spectrum");
        return ColumnSpectrum::from_prior(basis.values, noise / p_pilot_rx);
    }

    inline ColumnSpectrum fronthaul_spectrum(const SpectralBasis &basis, double zeta, double p_pilot_rx, double noise)
    {
        detail::check_pilot_power(p_pilot_rx, "fronthaul_spectrum");
        const RVector prior = (zeta * zeta) * basis.values;
        if (zeta == 0.0)
            return {prior, prior};
        return ColumnSpectrum::from_prior(prior, noise / p_pilot_rx);
    }

    // ---------- Operational estimators ----------

    // Normalized n x n DFT pilot matrix; X X^H = I.
    inline CMatrix pilot_matrix(int n)
    {
        if (n < 1)
            throw std::invalid_argument("pilot_matrix: size must be positive.");
        CMatrix x(n, n);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                x(a, b) = std::polar(scale, -2.0 * std::numbers::pi * a * b / n);
        return x;
    }

    inline void require_unitary(const CMatrix &pilots, double tolerance = 1e-10)
    {
        if (pilots.rows() != pilots.cols() ||
            (pilots * pilots.adjoint() - CMatrix::Identity(pilots.rows(), pilots.cols())).norm() >
                tolerance * std::sqrt(static_cast<double>(pilots.rows())))
            throw std::invalid_argument("pilot matrix must be square and unitary.");
    }

    // Linear MMSE filter C (C + s I)^{-1} applied to de-spread, de-scaled pilots
    inline CMatrix mmse_filter(const CMatrix &prior, double s)
    {
        const auto n = prior.rows();
        if (prior.norm() == 0.0)
            return CMatrix::Zero(n, n);
        if (s == 0.0)
            return CMatrix::Identity(n, n);
        const CMatrix shifted = prior + s * CMatrix::Identity(n, n);
        // C and shifted commute, so C shifted^{-1} = (shifted^{-1} C)
        return shifted.ldlt().solve(prior);
    }

    namespace detail
    {
        inline CMatrix estimate_columns(const CMatrix &obs, const CMatrix &pilots, std::span<const double> p_pilot_rx,
                                        const std::vector<CMatrix> &filters)
        {
            require_unitary(pilots);
            if (obs.cols() != pilots.rows() || static_cast<Eigen::Index>(p_pilot_rx.size()) != obs.cols() ||
                filters.size() != p_pilot_rx.size())
                throw std::invalid_argument("MMSE estimator: dimension mismatch.");
            const CMatrix despread = obs * pilots.adjoint();
            CMatrix est(obs.rows(), obs.cols());
            for (Eigen::Index i = 0; i < obs.cols(); ++i)
            {
                check_pilot_power(p_pilot_rx[static_cast<std::size_t>(i)], "MMSE estimator");
                est.col(i) = filters[static_cast<std::size_t>(i)] * despread.col(i) /
                             std::sqrt(p_pilot_rx[static_cast<std::size_t>(i)]);
            }
            return est;
        }
    } // namespace detail

    // Per-column MMSE filters for the access layer of one RRU
    inline std::vector<CMatrix> access_filters(const RMatrix &corr, std::span<const double> p_pilot_rx, double noise)
    {
        std::vector<CMatrix> out;
        const CMatrix c = corr.cast<cplx>();
        for (double p : p_pilot_rx)
        {
            detail::check_pilot_power(p, "access_filters");
            out.push_back(mmse_filter(c, noise / p));
        }
        return out;
    }

    inline std::vector<CMatrix> fronthaul_filters(const RMatrix &corr, double zeta, std::span<const double> p_pilot_rx,
                                                  double noise)
    {
        std::vector<CMatrix> out;
        const CMatrix c = (zeta * zeta) * corr.cast<cplx>();
        for (double p : p_pilot_rx)
        {
            detail::check_pilot_power(p, "fronthaul_filters");
            out.push_back(mmse_filter(c, noise / p));
        }
        return out;
    }

    // obs = H diag(sqrt(p)) X + noise, M x U_r. Returns the M x U_r estimate.
    inline CMatrix mmse_estimate_access(const CMatrix &obs, const CMatrix &pilots, std::span<const double> p_pilot_rx,
                                        const std::vector<CMatrix> &filters)
    {
        return detail::estimate_columns(obs, pilots, p_pilot_rx, filters);
    }

    inline CMatrix mmse_estimate_access(const CMatrix &obs, const CMatrix &pilots, std::span<const double> p_pilot_rx,
                                        const RMatrix &corr, double noise)
    {
        return mmse_estimate_access(obs, pilots, p_pilot_rx, access_filters(corr, p_pilot_rx, noise));
    }

    // obs has the LoS part nu H_d diag(sqrt(p)) X already removed. Returns
    // nu H_d + the MMSE estimate of the scatter.
    inline CMatrix mmse_estimate_fronthaul(const CMatrix &obs, const CMatrix &pilots,
                                           std::span<const double> p_pilot_rx, const CMatrix &los, double nu,
                                           const std::vector<CMatrix> &filters)
    {
        if (los.rows() != obs.rows() || los.cols() != obs.cols())
            throw std::invalid_argument("mmse_estimate_fronthaul: LoS matrix dimension mismatch.");
        return nu * los + detail::estimate_columns(obs, pilots, p_pilot_rx, filters);
    }

    inline CMatrix mmse_estimate_fronthaul(const CMatrix &obs, const CMatrix &pilots,
                                           std::span<const double> p_pilot_rx, const CMatrix &los, double nu,
                                           const RMatrix &corr, double zeta, double noise)
    {
        return mmse_estimate_fronthaul(obs, pilots, p_pilot_rx, los, nu,
                                       fronthaul_filters(corr, zeta, p_pilot_rx, noise));
    }

} // namespace cran
