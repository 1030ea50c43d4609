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

// Brute-force link simulation: sample channels, run both pilot phases, form
// matched filters, and push every signal class separately through the linear
// UD -> RRU -> BBU chain. Independent of closedrate by construction: nothing
// here includes or calls the closed-form engine.

#include "estimation.hpp"
#include "parallel.hpp"

#include <vector>

namespace cran
{
    struct OracleOptions
    {
        bool perfect_access_csi = false;
        bool perfect_fronthaul_csi = false;
        double fronthaul_noise_scale = 1.0; // multiplies the BBU noise variance (pilot and data)
    };

    // Everything fixed across realizations for one (cfg, topo, eta)
    struct OracleSetup
    {
        SystemConfig cfg;
        Topology topo;
        LinkBudget budget;
        ChannelStatistics stats;
        OracleOptions options;
        double noise_access = 0.0;
        double noise_fronthaul = 0.0;
        double lambda_fronthaul = 0.0;
        std::vector<double> lambda_access; // per UD
        std::vector<double> amplification; // a_k
        std::vector<CMatrix> access_pilots;        // per RRU, U_r x U_r
        std::vector<std::vector<double>> access_p; // pilot receive powers per RRU
        std::vector<std::vector<CMatrix>> access_filters_r;
        CMatrix fronthaul_pilots;
        std::vector<CMatrix> fronthaul_filters_k;

        OracleSetup(const SystemConfig &c, const Topology &t, const PowerSharingVector &eta, OracleOptions opt = {})
            : cfg(c), topo(t), budget(build_link_budget(c, t, eta)), stats(c, t), options(opt)
        {
            const int k_total = cfg.num_uds;
            noise_access = budget.noise_access;
            noise_fronthaul = budget.noise_fronthaul * options.fronthaul_noise_scale;

            // Normalizations from traces of the true channel second moments
            const double nu2 = stats.weights.nu * stats.weights.nu;
            const double z2 = stats.weights.zeta * stats.weights.zeta;
            double tr_b = 0.0;
            for (int k = 0; k < k_total; ++k)
                tr_b += nu2 * stats.los.col(k).squaredNorm() + z2 * stats.fronthaul_corr.diagonal().sum();
            lambda_fronthaul = k_total / tr_b;
            for (int k = 0; k < k_total; ++k)
            {
                lambda_access.push_back(1.0 / stats.access_corr.diagonal().sum());
                amplification.push_back(1.0 / budget.serving_data(k));
            }

            for (int r = 0; r < topo.index.num_rrus(); ++r)
            {
                const int u = topo.index.count(r);
                access_pilots.push_back(pilot_matrix(u));
                std::vector<double> p;
                for (int i = 0; i < u; ++i)
                    p.push_back(budget.serving_pilot(topo.index.global(r, i)));
                access_filters_r.push_back(access_filters(stats.access_corr, p, noise_access));
                access_p.push_back(std::move(p));
            }
            fronthaul_pilots = pilot_matrix(k_total);
            fronthaul_filters_k =
                fronthaul_filters(stats.fronthaul_corr, stats.weights.zeta, budget.rx_fronthaul_pilot, noise_fronthaul);
        }
    };

    struct ChannelRealization
    {
        AccessChannelSet access;
        FronthaulChannel fronthaul;
        CMatrix access_estimate;    // M x K, column k estimated at RRU r(k)
        CMatrix fronthaul_estimate; // N x K
        std::vector<double> amplification;

        // W_r = H_hat_r^H, U_r x M
        CMatrix access_combiner(int r) const
        {
            const auto &idx = access.index();
            return access_estimate.middleCols(idx.offset(r), idx.count(r)).adjoint();
        }
        CMatrix fronthaul_combiner() const { return fronthaul_estimate.adjoint(); }
    };

    // Detector-output powers for one UD in one realization.
    struct TermPowers
    {
        // Path set of the analytical model
        double desired = 0.0;
        double inter_stream = 0.0; // other UDs through their own streams
        double inter_rru = 0.0;    // cross-RRU legs of every stream
        double noise = 0.0;        // own forwarded access noise + BBU noise
        // Paths absent from the analytical model, measured separately
        double intra_rru_leakage = 0.0;  // co-RRU UDs through each other's streams
        double other_stream_noise = 0.0; // access noise forwarded by the other streams
        // Full chain by source
        double full_desired = 0.0;   // UD k* through every stream
        double full_co_rru = 0.0;    // other UDs of k*'s RRU
        double full_other_rru = 0.0; // UDs of other RRUs
        double full_noise = 0.0;     // all access noise (co-stream correlated) + BBU noise
        double total_output = 0.0;   // covariance route E|y|^2

        double model_interference() const { return inter_stream + inter_rru + noise; }
        double sinr() const { return desired / model_interference(); }
        double full_sinr() const { return full_desired / (full_co_rru + full_other_rru + full_noise); }
        double full_sum() const { return full_desired + full_co_rru + full_other_rru + full_noise; }

        TermPowers &operator+=(const TermPowers &o)
        {
            desired += o.desired;
            inter_stream += o.inter_stream;
            inter_rru += o.inter_rru;
            noise += o.noise;
            intra_rru_leakage += o.intra_rru_leakage;
            other_stream_noise += o.other_stream_noise;
            full_desired += o.full_desired;
            full_co_rru += o.full_co_rru;
            full_other_rru += o.full_other_rru;
            full_noise += o.full_noise;
            total_output += o.total_output;
            return *this;
        }
        TermPowers scaled(double s) const
        {
            TermPowers t = *this;
            for (double *v : {&t.desired, &t.inter_stream, &t.inter_rru, &t.noise, &t.intra_rru_leakage,
                              &t.other_stream_noise, &t.full_desired, &t.full_co_rru, &t.full_other_rru,
                              &t.full_noise, &t.total_output})
                *v *= s;
            return t;
        }
    };

    struct SimulationResult
    {
        ChannelRealization realization;
        std::vector<TermPowers> terms; // per UD
    };

    inline ChannelRealization sample_realization(const OracleSetup &s, Rng &rng)
    {
        const auto &idx = s.topo.index;
        const int k_total = idx.num_uds();
        ChannelRealization out;
        out.access = sample_access(s.topo, s.stats, rng);
        out.amplification = s.amplification;

        // Access pilot phase, per RRU, without inter-RRU pilot interference
        const auto m = static_cast<Eigen::Index>(s.cfg.rru_antennas);
        out.access_estimate.resize(m, k_total);
        const double sa = std::sqrt(s.noise_access);
        for (int r = 0; r < idx.num_rrus(); ++r)
        {
            const auto ru = static_cast<std::size_t>(r);
            const CMatrix h = out.access.serving(r);
            Eigen::VectorXd amp(idx.count(r));
            for (int i = 0; i < idx.count(r); ++i)
                amp(i) = std::sqrt(s.access_p[ru][static_cast<std::size_t>(i)]);
            const CMatrix obs = h * amp.cast<cplx>().asDiagonal() * s.access_pilots[ru] +
                                sa * complex_gaussian(m, idx.count(r), rng);
            out.access_estimate.middleCols(idx.offset(r), idx.count(r)) =
                s.options.perfect_access_csi
                    ? h
                    : mmse_estimate_access(obs, s.access_pilots[ru], s.access_p[ru], s.access_filters_r[ru]);
        }

        // Fronthaul pilot phase, LoS contribution removed before estimation
        out.fronthaul = sample_fronthaul(s.stats, rng);
        const CMatrix hb = out.fronthaul.combined();
        Eigen::VectorXd famp(k_total);
        for (int k = 0; k < k_total; ++k)
            famp(k) = std::sqrt(s.budget.rx_fronthaul_pilot[static_cast<std::size_t>(k)]);
        const auto famp_c = famp.cast<cplx>().asDiagonal();
        CMatrix obs = hb * famp_c * s.fronthaul_pilots +
                      std::sqrt(s.noise_fronthaul) * complex_gaussian(hb.rows(), k_total, rng);
        obs -= out.fronthaul.nu * out.fronthaul.los * famp_c * s.fronthaul_pilots;
        out.fronthaul_estimate = s.options.perfect_fronthaul_csi
                                     ? hb
                                     : mmse_estimate_fronthaul(obs, s.fronthaul_pilots, s.budget.rx_fronthaul_pilot,
                                                               out.fronthaul.los, out.fronthaul.nu,
                                                               s.fronthaul_filters_k);
        return out;
    }

    // Term powers for every detector given one realization.
    inline std::vector<TermPowers> measure_terms(const OracleSetup &s, const ChannelRealization &ch)
    {
        const auto &idx = s.topo.index;
        const auto &lb = s.budget;
        const int k_total = idx.num_uds();
        const int r_total = idx.num_rrus();

        // RRU stage: stream k = sqrt(a_k lambda_k) h_hat_k^H (sum_j sqrt(p_j) h_{r(k),j} x_j + n_r(k))
        CMatrix c(k_total, k_total);
        std::vector<double> gain(static_cast<std::size_t>(k_total));
        std::vector<double> own_noise(static_cast<std::size_t>(k_total));
        for (int k = 0; k < k_total; ++k)
        {
            const auto kk = static_cast<std::size_t>(k);
            const int r = idx.rru_of(k);
            gain[kk] = std::sqrt(s.amplification[kk] * s.lambda_access[kk]);
            const auto est = ch.access_estimate.col(k);
            const auto row = est.adjoint() * ch.access.links(r);
            for (int j = 0; j < k_total; ++j)
                c(k, j) = gain[kk] * std::sqrt(lb.rx_access_data(r, j)) * row(j);
            own_noise[kk] = gain[kk] * gain[kk] * s.noise_access * est.squaredNorm();
        }

        // BBU stage: g(k*, k) = sqrt(lambda_b P_rx,k^(r,d)) h_hat_b,k*^H h_b,k
        const CMatrix hb = ch.fronthaul.combined();
        CMatrix g = ch.fronthaul_estimate.adjoint() * hb;
        for (int k = 0; k < k_total; ++k)
            g.col(k) *= std::sqrt(s.lambda_fronthaul * lb.rx_fronthaul_data[static_cast<std::size_t>(k)]);

        // Stream covariance for the covariance route
        CMatrix stream_cov = c * c.adjoint();
        for (int k = 0; k < k_total; ++k)
            for (int kp = 0; kp < k_total; ++kp)
                if (idx.rru_of(k) == idx.rru_of(kp))
                    stream_cov(k, kp) += gain[static_cast<std::size_t>(k)] * gain[static_cast<std::size_t>(kp)] *
                                         s.noise_access *
                                         ch.access_estimate.col(k).dot(ch.access_estimate.col(kp));

        std::vector<TermPowers> out(static_cast<std::size_t>(k_total));
        for (int ks = 0; ks < k_total; ++ks)
        {
            TermPowers &t = out[static_cast<std::size_t>(ks)];
            const int r_star = idx.rru_of(ks);
            const double bbu_noise = s.lambda_fronthaul * s.noise_fronthaul * ch.fronthaul_estimate.col(ks).squaredNorm();

            for (int k = 0; k < k_total; ++k)
            {
                const double gk = std::norm(g(ks, k));
                for (int j = 0; j < k_total; ++j)
                {
                    const double p = gk * std::norm(c(k, j));
                    if (j == k)
                        (k == ks ? t.desired : t.inter_stream) += p;
                    else if (idx.rru_of(j) != idx.rru_of(k))
                        t.inter_rru += p;
                    else
                        t.intra_rru_leakage += p;
                }
                if (k != ks)
                    t.other_stream_noise += gk * own_noise[static_cast<std::size_t>(k)];
            }
            t.noise = std::norm(g(ks, ks)) * own_noise[static_cast<std::size_t>(ks)] + bbu_noise;

            // Full chain by source
            const Eigen::RowVectorXcd row = g.row(ks);
            const Eigen::RowVectorXcd through = row * c; // UD j's total coefficient
            for (int j = 0; j < k_total; ++j)
            {
                const double p = std::norm(through(j));
                if (j == ks)
                    t.full_desired += p;
                else if (idx.rru_of(j) == r_star)
                    t.full_co_rru += p;
                else
                    t.full_other_rru += p;
            }
            t.full_noise = bbu_noise;
            for (int r = 0; r < r_total; ++r)
            {
                CVector v = CVector::Zero(ch.access_estimate.rows());
                for (int i = 0; i < idx.count(r); ++i)
                {
                    const int k = idx.global(r, i);
                    v += std::conj(row(k)) * gain[static_cast<std::size_t>(k)] * ch.access_estimate.col(k);
                }
                t.full_noise += s.noise_access * v.squaredNorm();
            }
            t.total_output = (row * stream_cov * row.adjoint())(0, 0).real() + bbu_noise;
        }
        return out;
    }

    inline SimulationResult simulate_once(const OracleSetup &s, Rng &rng)
    {
        SimulationResult out;
        out.realization = sample_realization(s, rng);
        out.terms = measure_terms(s, out.realization);
        return out;
    }

    inline SimulationResult simulate_once(const SystemConfig &cfg, const Topology &topo, const PowerSharingVector &eta,
                                          Rng &rng, OracleOptions options = {})
    {
        return simulate_once(OracleSetup(cfg, topo, eta, options), rng);
    }

    struct EmpiricalRate
    {
        int realizations = 0;
        std::vector<double> rate;        // per UD, mean of log2(1 + SINR)
        std::vector<double> rate_stderr; // per UD
        double sum_rate = 0.0;           // mean over realizations of the per-realization sum
        double sum_rate_stderr = 0.0;
        std::vector<double> ratio_of_means_rate; // log2(1 + E{S} / E{IN}) per UD
        double ratio_of_means_sum = 0.0;
        double full_chain_sum = 0.0; // mean-of-logs over the full chain
        double full_chain_stderr = 0.0;
        std::vector<TermPowers> mean_terms; // per UD
        std::vector<double> sum_rate_samples;
    };

    namespace detail
    {
        struct MeanAccumulator
        {
            double sum = 0.0;
            double sum_sq = 0.0;
            int n = 0;
            void add(double x)
            {
                sum += x;
                sum_sq += x * x;
                ++n;
            }
            double mean() const { return sum / n; }
            double stderr_() const
            {
                if (n < 2)
                    return 0.0;
                const double m = mean();
                const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1));
                return std::sqrt(var / n);
            }
        };
    } // namespace detail

    // Realization i uses substream(seed, i); results are reduced in index order,
    // so the outcome is independent of the thread count.
    inline EmpiricalRate ergodic_rate(const SystemConfig &cfg, const Topology &topo, const PowerSharingVector &eta,
                                      int n_realizations, std::uint64_t seed, OracleOptions options = {})
    {
        if (n_realizations < 2)
            throw std::invalid_argument("ergodic_rate: need at least two realizations.");
        const OracleSetup setup(cfg, topo, eta, options);
        const int k_total = cfg.num_uds;
        std::vector<std::vector<TermPowers>> per(static_cast<std::size_t>(n_realizations));
        parallel_for(per.size(), [&](std::size_t i) {
            Rng rng = substream(seed, i);
            per[i] = measure_terms(setup, sample_realization(setup, rng));
        });

        EmpiricalRate out;
        out.realizations = n_realizations;
        std::vector<detail::MeanAccumulator> ud(static_cast<std::size_t>(k_total));
        detail::MeanAccumulator total, full;
        out.mean_terms.assign(static_cast<std::size_t>(k_total), TermPowers{});
        for (const auto &terms : per)
        {
            double s = 0.0, f = 0.0;
            for (int k = 0; k < k_total; ++k)
            {
                const auto &t = terms[static_cast<std::size_t>(k)];
                const double c = std::log2(1.0 + t.sinr());
                ud[static_cast<std::size_t>(k)].add(c);
                s += c;
                f += std::log2(1.0 + t.full_sinr());
                out.mean_terms[static_cast<std::size_t>(k)] += t;
            }
            total.add(s);
            full.add(f);
            out.sum_rate_samples.push_back(s);
        }
        for (int k = 0; k < k_total; ++k)
        {
            const auto kk = static_cast<std::size_t>(k);
            out.rate.push_back(ud[kk].mean());
            out.rate_stderr.push_back(ud[kk].stderr_());
            out.mean_terms[kk] = out.mean_terms[kk].scaled(1.0 / n_realizations);
            const auto &m = out.mean_terms[kk];
            out.ratio_of_means_rate.push_back(std::log2(1.0 + m.desired / m.model_interference()));
            out.ratio_of_means_sum += out.ratio_of_means_rate.back();
        }
        out.sum_rate = total.mean();
        out.sum_rate_stderr = total.stderr_();
        out.full_chain_sum = full.mean();
        out.full_chain_stderr = full.stderr_();
        return out;
    }

    // ---------- Asymptotic lemma checks ----------

    struct ConcentrationStats
    {
        int n = 0;
        double inner_product = 0.0; // mean |x^H y| / N
        double self_norm = 0.0;     // mean |x^H x / N - c|
        double quadratic = 0.0;     // mean |(x^H A x / N)^2 - (Tr A / N)^2|
    };

    struct RatioGapStats
    {
        int m = 0;
        double gap = 0.0; // |E log2(1 + X / Y) - log2(1 + E X / E Y)|
    };

    struct LemmaReport
    {
        std::vector<ConcentrationStats> concentration;
        std::vector<RatioGapStats> ratio_gap;
    };

    namespace detail
    {
        // A x for the exponential correlation A (entries rho^|m-n|) in O(N):
        // forward and backward first-order recursions share the diagonal once.
        inline CVector exp_correlation_apply(const CVector &x, double rho)
        {
            const auto n = x.size();
            CVector fwd(n), bwd(n);
            cplx acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                fwd(i) = acc = x(i) + rho * acc;
            acc = 0.0;
            for (Eigen::Index i = n - 1; i >= 0; --i)
                bwd(i) = acc = x(i) + rho * acc;
            return fwd + bwd - x;
        }
    } // namespace detail

    // x, y ~ CN(0, c I_N) independent; A = exponential correlation with `rho`.
    inline std::vector<ConcentrationStats> check_concentration(const std::vector<int> &n_grid, int trials,
                                                               std::uint64_t seed, double c = 1.0, double rho = 0.1)
    {
        if (trials < 1)
            throw std::invalid_argument("check_concentration: trials must be positive.");
        std::vector<ConcentrationStats> out(n_grid.size());
        parallel_for(n_grid.size(), [&](std::size_t g) {
            const int n = n_grid[g];
            Rng rng = substream(seed, g, 1);
            const double sd = std::sqrt(c);
            const double tr_a = n; // unit diagonal
            ConcentrationStats st;
            st.n = n;
            for (int t = 0; t < trials; ++t)
            {
                const CVector x = sd * complex_gaussian(n, 1, rng);
                const CVector y = sd * complex_gaussian(n, 1, rng);
                st.inner_product += std::abs(x.dot(y)) / n;
                st.self_norm += std::abs(x.squaredNorm() / n - c);
                const double q = x.dot(detail::exp_correlation_apply(x, rho)).real() / n;
                st.quadratic += std::abs(q * q - (c * tr_a / n) * (c * tr_a / n));
            }
            st.inner_product /= trials;
            st.self_norm /= trials;
            st.quadratic /= trials;
            out[g] = st;
        });
        return out;
    }

    // X = |x|^2, Y = |y|^2 with x, y ~ CN(0, I_M): the ratio-of-expectations gap.
    // The plug-in uses the sample means of the same draws, which cancels the
    // first-order sampling noise of the two expectations.
    inline std::vector<RatioGapStats> check_ratio_gap(const std::vector<int> &m_grid, int trials, std::uint64_t seed)
    {
        if (trials < 2)
            throw std::invalid_argument("check_ratio_gap: need at least two trials.");
        std::vector<RatioGapStats> out(m_grid.size());
        for (std::size_t g = 0; g < m_grid.size(); ++g)
        {
            const int m = m_grid[g];
            Rng rng = substream(seed, g, 2);
            std::exponential_distribution<double> expo(1.0);
            double sx = 0.0, sy = 0.0, slog = 0.0;
            for (int t = 0; t < trials; ++t)
            {
                double x = 0.0, y = 0.0;
                for (int i = 0; i < m; ++i)
                    x += expo(rng);
                for (int i = 0; i < m; ++i)
                    y += expo(rng);
                sx += x;
                sy += y;
                slog += std::log2(1.0 + x / y);
            }
            out[g] = {m, std::abs(slog / trials - std::log2(1.0 + sx / sy))};
        }
        return out;
    }

    inline LemmaReport check_lemmas(const std::vector<int> &n_grid, int trials, const std::vector<int> &m_grid,
                                    int gap_trials, std::uint64_t seed)
    {
        for (std::size_t i = 1; i < n_grid.size(); ++i)
            if (n_grid[i] <= n_grid[i - 1])
                throw std::invalid_argument("check_lemmas: N grid must be ascending.");
        return {check_concentration(n_grid, trials, seed), check_ratio_gap(m_grid, gap_trials, seed)};
    }

} // namespace cran
