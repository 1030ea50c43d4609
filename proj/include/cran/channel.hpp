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

// Correlated Rayleigh access channels, Rician fronthaul channels and the
// deterministic line-of-sight component.

#include "sysmodel.hpp"

#include <limits>
#include <numbers>
#include <vector>

namespace cran
{
    // Exponential correlation: entry (m, n) = rho^|m - n|
    inline RMatrix exp_correlation(int size, double rho)
    {
        if (size < 1)
            throw std::invalid_argument("exp_correlation: size must be positive.");
        if (!(rho >= 0.0) || rho >= 1.0)
            throw std::domain_error("exp_correlation: rho must lie in [0, 1).");
        RMatrix c(size, size);
        for (int m = 0; m < size; ++m)
            for (int n = 0; n < size; ++n)
                c(m, n) = std::pow(rho, std::abs(m - n));
        return c;
    }

    struct RicianWeights
    {
        double nu = 0.0;   // LoS amplitude weight
        double zeta = 1.0; // scatter amplitude weight
    };

    inline RicianWeights rician_weights(double k_rice_db)
    {
        if (std::isnan(k_rice_db))
            throw std::invalid_argument("rician_weights: NaN Rician factor.");
        if (k_rice_db == std::numeric_limits<double>::infinity())
            return {1.0, 0.0};
        const double kappa = db_to_linear(k_rice_db);
        return {std::sqrt(kappa / (1.0 + kappa)), std::sqrt(1.0 / (1.0 + kappa))};
    }

    // Steering column exp(i*pi*n*sin(theta)) for n = 0..N-1
    inline CVector steering(int num_antennas, double theta)
    {
        CVector v(num_antennas);
        const double s = std::sin(theta);
        for (int n = 0; n < num_antennas; ++n)
            v(n) = std::polar(1.0, std::numbers::pi * n * s);
        return v;
    }

    // N x K LoS matrix; column k steers toward the RRU hosting stream k.
    inline CMatrix los_matrix(int num_antennas, const Topology &topo)
    {
        const int k_total = topo.index.num_uds();
        if (num_antennas < k_total)
            throw std::invalid_argument("los_matrix: need N >= K.");
        CMatrix h(num_antennas, k_total);
        for (int k = 0; k < k_total; ++k)
            h.col(k) = steering(num_antennas, topo.stream_azimuth(k));
        return h;
    }

    // Square root of a real symmetric PSD correlation matrix, as a complex matrix
    inline CMatrix correlation_sqrt(const RMatrix &corr) { return hermitian_sqrt(corr.cast<cplx>()); }

    // Receive-side correlation and its square root, shared by every draw
    struct ChannelStatistics
    {
        RMatrix access_corr;    // M x M
        RMatrix fronthaul_corr; // N x N
        CMatrix access_sqrt;
        CMatrix fronthaul_sqrt;
        RicianWeights weights;
        CMatrix los; // N x K

        ChannelStatistics(const SystemConfig &cfg, const Topology &topo)
            : access_corr(exp_correlation(cfg.rru_antennas, cfg.correlation_rho)),
              fronthaul_corr(exp_correlation(cfg.bbu_antennas, cfg.correlation_rho)),
              access_sqrt(correlation_sqrt(access_corr)), fronthaul_sqrt(correlation_sqrt(fronthaul_corr)),
              weights(rician_weights(cfg.rician_db)), los(los_matrix(cfg.bbu_antennas, topo))
        {
        }
    };

    // All UD -> RRU channels. links(r) is the M x K matrix whose column j is the
    // channel from UD j to RRU r; the serving block holds r's own UDs.
    class AccessChannelSet
    {
    public:
        AccessChannelSet() = default;
        AccessChannelSet(std::vector<CMatrix> links, UdIndexMap index)
            : links_(std::move(links)), index_(std::move(index))
        {
        }

        const CMatrix &links(int r) const { return links_.at(static_cast<std::size_t>(r)); }
        CMatrix &links(int r) { return links_.at(static_cast<std::size_t>(r)); }

        // H_r: M x U_r
        CMatrix serving(int r) const { return links(r).middleCols(index_.offset(r), index_.count(r)); }

        // H_{r/r'}: M x U_r', the UDs of RRU r' as seen by RRU r
        CMatrix interfering(int r, int r_other) const
        {
            if (r == r_other)
                throw std::invalid_argument("AccessChannelSet::interfering: r and r' must differ.");
            return links(r).middleCols(index_.offset(r_other), index_.count(r_other));
        }

        int num_rrus() const { return static_cast<int>(links_.size()); }
        const UdIndexMap &index() const { return index_; }

    private:
        std::vector<CMatrix> links_;
        UdIndexMap index_;
    };

    struct FronthaulChannel
    {
        CMatrix los;     // H_d
        CMatrix scatter; // H_r, already colored by the BBU correlation
        double nu = 0.0;
        double zeta = 1.0;

        CMatrix combined() const { return nu * los + zeta * scatter; }
    };

    // Each RRU sees every UD through its own receive correlation.
    inline AccessChannelSet sample_access(const Topology &topo, const ChannelStatistics &stats, Rng &rng)
    {
        const int k_total = topo.index.num_uds();
        const auto m = stats.access_sqrt.rows();
        std::vector<CMatrix> links;
        links.reserve(static_cast<std::size_t>(topo.index.num_rrus()));
        for (int r = 0; r < topo.index.num_rrus(); ++r)
            links.push_back(stats.access_sqrt * complex_gaussian(m, k_total, rng));
        return AccessChannelSet(std::move(links), topo.index);
    }

    inline FronthaulChannel sample_fronthaul(const ChannelStatistics &stats, Rng &rng)
    {
        FronthaulChannel ch;
        ch.los = stats.los;
        ch.nu = stats.weights.nu;
        ch.zeta = stats.weights.zeta;
        ch.scatter = stats.fronthaul_sqrt * complex_gaussian(stats.los.rows(), stats.los.cols(), rng);
        return ch;
    }

} // namespace cran
