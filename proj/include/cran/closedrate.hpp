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

// Deterministic (asymptotic) per-UD SINR and sum-rate from covariances and link
// budgets only. No channel is ever sampled here.
//
// Notation per stream k: Psi_hat_k / Psi_tilde_k are the access estimate / error
// covariances, Phi_hat_k / Phi_tilde_k the fronthaul scatter ones, Phi = zeta^2 R_b,
// h_k the LoS column and B_k = h_k h_k^H.

#include "estimation.hpp"

#include <string>
#include <vector>

namespace cran
{
    enum class RateMethod
    {
        closed_form,
        monte_carlo,
    };

    inline const char *to_string(RateMethod m) { return m == RateMethod::closed_form ? "closed-form" : "monte-carlo"; }

    // How the inter-stream and inter-RRU coefficients are read.
    //   stream_consistent: amplification/normalization of the RRU carrying stream k
    //                      (matches the simulated chain; default)
    //   as_printed:        a_{k*} on the inter-stream term, no amplification on the
    //                      inter-RRU term
    enum class CoefficientConvention
    {
        stream_consistent,
        as_printed,
    };

    struct RateReport
    {
        std::vector<double> signal;
        std::vector<double> interference_noise;
        std::vector<double> sinr;
        std::vector<double> rate; // bits/s/Hz
        double sum_rate = 0.0;
        RateMethod method = RateMethod::closed_form;
    };

    struct LambdaFactors
    {
        double fronthaul = 0.0;     // lambda^(b/r)
        std::vector<double> access; // lambda_k^(r/u) per UD
    };

    // Normalizations from the true-channel covariance traces:
    //   lambda_b = (Tr{nu^2 sum_k B_k + K Phi} / K)^{-1},  lambda_k = (U_r Tr R_a / U_r)^{-1}
    inline LambdaFactors lambda_factors(const SystemConfig &cfg, const RMatrix &access_corr,
                                        const RMatrix &fronthaul_corr, const CMatrix &los)
    {
        const auto w = rician_weights(cfg.rician_db);
        const double k = cfg.num_uds;
        const double tr_b = w.nu * w.nu * los.squaredNorm() + w.zeta * w.zeta * k * fronthaul_corr.trace();
        if (!(tr_b > 0.0))
            throw std::domain_error("lambda_factors: fronthaul channel covariance has zero trace.");
        LambdaFactors out;
        out.fronthaul = k / tr_b;
        const UdIndexMap index(cfg.uds_per_rru);
        for (int j = 0; j < cfg.num_uds; ++j)
        {
            const double u = index.count(index.rru_of(j));
            const double tr_a = u * access_corr.trace();
            if (!(tr_a > 0.0))
                throw std::domain_error("lambda_factors: access channel covariance has zero trace.");
            out.access.push_back(u / tr_a);
        }
        return out;
    }

    // All expectation building blocks for one power-sharing vector.
    struct UpsilonTerms
    {
        int num_uds = 0;
        int bbu_antennas = 0;
        double nu = 0.0;
        LambdaFactors lambda;
        std::vector<double> a; // amplification 1 / P_rx^(u,d) of the serving RRU

        std::vector<double> s1; // (Tr Psi_hat)^2 + Tr{Psi_hat Psi_tilde}
        std::vector<double> s2; // (nu^2 N + Tr Phi_hat)^2
        std::vector<double> in1;
        RMatrix cross; // X(k*, k) = Tr{(nu^2 B_k* + Phi_hat_k*)(nu^2 B_k + Phi)}
        RMatrix in2;   // (k*, k): s1_k X(k*, k), zero diagonal
        RMatrix in3;   // (k*, k): Tr{Psi_hat_k Psi_SigmaV,k} X(k*, k), the j-sum folded in
        std::vector<double> tr_est_corr; // Tr{Psi_hat_k R_a}, the per-j access factor of in3
        std::vector<double> in4_access;    // Tr Psi_hat x Tr{(nu^2 B + Phi)(nu^2 B + Phi_hat)}
        std::vector<double> in4_fronthaul; // nu^2 N + Tr Phi_hat

        // Per-interferer term of in3: UD j of another RRU leaking into stream k
        double in3_pair(int k_star, int k, int j, const LinkBudget &budget) const
        {
            const int r = budget.index.rru_of(k);
            if (budget.index.rru_of(j) == r)
                return 0.0;
            return budget.rx_access_data(r, j) * tr_est_corr[static_cast<std::size_t>(k)] * cross(k_star, k);
        }
    };

    inline double signal_power(int k_star, const UpsilonTerms &t, const LinkBudget &budget)
    {
        const auto ks = static_cast<std::size_t>(k_star);
        return t.a[ks] * t.lambda.fronthaul * t.lambda.access[ks] * budget.rx_fronthaul_data[ks] *
               budget.serving_data(k_star) * t.s1[ks] * t.s2[ks];
    }

    struct InterferenceBreakdown
    {
        double estimation_error = 0.0; // IN,1
        double inter_stream = 0.0;     // IN,2
        double inter_rru = 0.0;        // IN,3
        double noise = 0.0;            // IN,4
        double total() const { return estimation_error + inter_stream + inter_rru + noise; }
    };

    inline InterferenceBreakdown interference_breakdown(int k_star, const UpsilonTerms &t, const LinkBudget &budget,
                                                        CoefficientConvention conv = CoefficientConvention::stream_consistent)
    {
        const auto ks = static_cast<std::size_t>(k_star);
        const double lb = t.lambda.fronthaul;
        InterferenceBreakdown out;
        out.estimation_error = t.a[ks] * lb * t.lambda.access[ks] * budget.rx_fronthaul_data[ks] *
                               budget.serving_data(k_star) * t.in1[ks];
        for (int k = 0; k < t.num_uds; ++k)
        {
            const auto kk = static_cast<std::size_t>(k);
            const bool printed = conv == CoefficientConvention::as_printed;
            if (k != k_star)
            {
                const double amp = printed ? t.a[ks] : t.a[kk];
                const double lam = printed ? t.lambda.access[ks] : t.lambda.access[kk];
                out.inter_stream +=
                    amp * lb * lam * budget.rx_fronthaul_data[kk] * budget.serving_data(k) * t.in2(k_star, k);
            }
            const double amp3 = printed ? 1.0 : t.a[kk];
            out.inter_rru += amp3 * lb * t.lambda.access[kk] * budget.rx_fronthaul_data[kk] * t.in3(k_star, k);
        }
        out.noise = t.a[ks] * lb * t.lambda.access[ks] * budget.rx_fronthaul_data[ks] * budget.noise_access *
                        t.in4_access[ks] +
                    lb * t.in4_fronthaul[ks] * budget.noise_fronthaul;
        return out;
    }

    inline double interference_noise_power(int k_star, const UpsilonTerms &t, const LinkBudget &budget,
                                           CoefficientConvention conv = CoefficientConvention::stream_consistent)
    {
        return interference_breakdown(k_star, t, budget, conv).total();
    }

    inline RateReport assemble_report(const UpsilonTerms &t, const LinkBudget &budget,
                                      CoefficientConvention conv = CoefficientConvention::stream_consistent)
    {
        RateReport rep;
        rep.method = RateMethod::closed_form;
        for (int k = 0; k < t.num_uds; ++k)
        {
            const double s = signal_power(k, t, budget);
            const double in = interference_noise_power(k, t, budget, conv);
            rep.signal.push_back(s);
            rep.interference_noise.push_back(in);
            rep.sinr.push_back(s / in);
            rep.rate.push_back(std::log2(1.0 + s / in));
            rep.sum_rate += rep.rate.back();
        }
        return rep;
    }

    // Precomputes everything that does not depend on the power-sharing vector.
    // Evaluation works in the eigenbases of the two correlation matrices, where
    // every covariance is diagonal: O(K^2 N) per call. Reentrant.
    class ClosedFormModel
    {
    public:
        ClosedFormModel(SystemConfig cfg, Topology topo)
            : cfg_(std::move(cfg)), topo_(std::move(topo)),
              access_corr_(exp_correlation(cfg_.rru_antennas, cfg_.correlation_rho)),
              fronthaul_corr_(exp_correlation(cfg_.bbu_antennas, cfg_.correlation_rho)), access_(access_corr_),
              fronthaul_(fronthaul_corr_), weights_(rician_weights(cfg_.rician_db)),
              los_(los_matrix(cfg_.bbu_antennas, topo_))
        {
            cfg_.validate();
            check_consistent(cfg_, topo_);
            lambda_ = lambda_factors(cfg_, access_corr_, fronthaul_corr_, los_);
            los_power_ = (fronthaul_.vectors.transpose().cast<cplx>() * los_).cwiseAbs2();
            gram_ = (los_.adjoint() * los_).cwiseAbs2();
            fronthaul_prior_ = weights_.zeta * weights_.zeta * fronthaul_.values;
            los_prior_ = los_power_.transpose() * fronthaul_prior_; // h_k^H Phi h_k
        }

        const SystemConfig &config() const { return cfg_; }
        const Topology &topology() const { return topo_; }
        const CMatrix &los() const { return los_; }
        const LambdaFactors &lambda() const { return lambda_; }
        const RMatrix &access_correlation() const { return access_corr_; }
        const RMatrix &fronthaul_correlation() const { return fronthaul_corr_; }

        LinkBudget budget(const PowerSharingVector &eta) const { return build_link_budget(cfg_, topo_, eta); }

        UpsilonTerms terms(const LinkBudget &lb) const
        {
            const int k_total = cfg_.num_uds;
            const double nu2 = weights_.nu * weights_.nu;
            const double n = cfg_.bbu_antennas;
            UpsilonTerms t;
            t.num_uds = k_total;
            t.bbu_antennas = cfg_.bbu_antennas;
            t.nu = weights_.nu;
            t.lambda = lambda_;

            RMatrix fh(fronthaul_.size(), k_total); // Phi_hat spectra, one column per stream
            RMatrix fe(fronthaul_.size(), k_total);
            std::vector<double> tr_est(static_cast<std::size_t>(k_total));
            for (int k = 0; k < k_total; ++k)
            {
                const auto kk = static_cast<std::size_t>(k);
                const auto acc = access_spectrum(access_, lb.serving_pilot(k), lb.noise_access);
                const auto fro =
                    fronthaul_spectrum(fronthaul_, weights_.zeta, lb.rx_fronthaul_pilot[kk], lb.noise_fronthaul);
                fh.col(k) = fro.estimate;
                fe.col(k) = fro.error;
                tr_est[kk] = acc.estimate.sum();
                t.a.push_back(1.0 / lb.serving_data(k));
                t.s1.push_back(tr_est[kk] * tr_est[kk] + acc.estimate.dot(acc.error));
                t.tr_est_corr.push_back(acc.estimate.dot(access_.values));
                const double tr_fh = fro.estimate.sum();
                t.s2.push_back((nu2 * n + tr_fh) * (nu2 * n + tr_fh));
                t.in4_fronthaul.push_back(nu2 * n + tr_fh);
            }

            // X(k*, k) = nu^4 |h_k*^H h_k|^2 + nu^2 h_k^H Phi_hat_k* h_k + nu^2 h_k*^H Phi h_k* + Tr{Phi_hat_k* Phi}
            const RMatrix est_on_los = fh.transpose() * los_power_; // (k*, k): h_k^H Phi_hat_k* h_k
            const RVector est_on_prior = fh.transpose() * fronthaul_prior_;
            t.cross = nu2 * nu2 * gram_ + nu2 * est_on_los;
            t.cross.colwise() += nu2 * los_prior_ + est_on_prior;

            t.in2 = t.cross;
            t.in3 = t.cross;
            for (int ks = 0; ks < k_total; ++ks)
            {
                const auto kss = static_cast<std::size_t>(ks);
                const double err_on_los = fe.col(ks).dot(los_power_.col(ks));
                t.in1.push_back(t.s1[kss] * (nu2 * err_on_los + fe.col(ks).dot(fh.col(ks))));
                // Tr{(nu^2 B + Phi)(nu^2 B + Phi_hat)} for the own stream
                const double x4 = nu2 * nu2 * n * n + nu2 * est_on_los(ks, ks) + nu2 * los_prior_(ks) + est_on_prior(ks);
                t.in4_access.push_back(tr_est[kss] * x4);
            }
            for (int k = 0; k < k_total; ++k)
            {
                const auto kk = static_cast<std::size_t>(k);
                t.in2.col(k) *= t.s1[kk];
                t.in3.col(k) *= lb.cross_rru_data(k) * t.tr_est_corr[kk];
            }
            t.in2.diagonal().setZero();
            return t;
        }

        UpsilonTerms terms(const PowerSharingVector &eta) const { return terms(budget(eta)); }

        RateReport evaluate(const PowerSharingVector &eta,
                            CoefficientConvention conv = CoefficientConvention::stream_consistent) const
        {
            const LinkBudget lb = budget(eta);
            return assemble_report(terms(lb), lb, conv);
        }

        double sum_rate(const PowerSharingVector &eta,
                        CoefficientConvention conv = CoefficientConvention::stream_consistent) const
        {
            return evaluate(eta, conv).sum_rate;
        }

        // Reference route: the same expectations from explicit M x M / N x N
        // covariance matrices, traces taken directly. Slow; for cross-checks.
        UpsilonTerms reference_terms(const PowerSharingVector &eta) const
        {
            const LinkBudget lb = budget(eta);
            const int k_total = cfg_.num_uds;
            const double nu2 = weights_.nu * weights_.nu;
            const double z2 = weights_.zeta * weights_.zeta;
            const auto n = static_cast<Eigen::Index>(cfg_.bbu_antennas);
            const CMatrix ra = access_corr_.cast<cplx>();
            const CMatrix phi = z2 * fronthaul_corr_.cast<cplx>();
            const auto tr = [](const CMatrix &x, const CMatrix &y) { return (x * y).trace().real(); };

            UpsilonTerms t;
            t.num_uds = k_total;
            t.bbu_antennas = cfg_.bbu_antennas;
            t.nu = weights_.nu;
            t.lambda = lambda_;
            std::vector<ColumnCovariance> acc, fro;
            std::vector<CMatrix> b;
            for (int k = 0; k < k_total; ++k)
            {
                const auto kk = static_cast<std::size_t>(k);
                acc.push_back(access_cov(access_corr_, lb.serving_pilot(k), lb.noise_access));
                fro.push_back(
                    fronthaul_cov(fronthaul_corr_, weights_.zeta, lb.rx_fronthaul_pilot[kk], lb.noise_fronthaul));
                b.push_back(los_.col(k) * los_.col(k).adjoint());
                const double tr_hat = acc[kk].estimate.trace().real();
                t.a.push_back(1.0 / lb.serving_data(k));
                t.s1.push_back(tr_hat * tr_hat + tr(acc[kk].estimate, acc[kk].error));
                const double tr_fh = fro[kk].estimate.trace().real();
                t.s2.push_back((nu2 * n + tr_fh) * (nu2 * n + tr_fh));
                t.in4_fronthaul.push_back(nu2 * n + tr_fh);
                t.tr_est_corr.push_back(tr(acc[kk].estimate, ra));
            }
            t.cross.resize(k_total, k_total);
            t.in2.resize(k_total, k_total);
            t.in3.resize(k_total, k_total);
            for (int ks = 0; ks < k_total; ++ks)
            {
                const auto kss = static_cast<std::size_t>(ks);
                const CMatrix left = nu2 * b[kss] + fro[kss].estimate;
                t.in1.push_back(t.s1[kss] * tr(left, fro[kss].error));
                t.in4_access.push_back(acc[kss].estimate.trace().real() *
                                       tr(nu2 * b[kss] + phi, nu2 * b[kss] + fro[kss].estimate));
                for (int k = 0; k < k_total; ++k)
                {
                    const auto kk = static_cast<std::size_t>(k);
                    t.cross(ks, k) = tr(left, nu2 * b[kk] + phi);
                    t.in2(ks, k) = k == ks ? 0.0 : t.s1[kk] * t.cross(ks, k);
                    // Psi_SigmaV for stream k: cross-RRU data powers at its RRU times R_a
                    const CMatrix sigma_v = lb.cross_rru_data(k) * ra;
                    t.in3(ks, k) = tr(acc[kk].estimate, sigma_v) * t.cross(ks, k);
                }
            }
            return t;
        }

    private:
        SystemConfig cfg_;
        Topology topo_;
        RMatrix access_corr_;
        RMatrix fronthaul_corr_;
        SpectralBasis access_;
        SpectralBasis fronthaul_;
        RicianWeights weights_;
        CMatrix los_;
        LambdaFactors lambda_;
        RMatrix los_power_;       // (i, k) = |q_i^T h_k|^2 in the BBU eigenbasis
        RMatrix gram_;            // |h_k*^H h_k|^2
        RVector fronthaul_prior_; // eigenvalues of Phi
        RVector los_prior_;       // h_k^H Phi h_k
    };

    inline RateReport sum_rate(const SystemConfig &cfg, const Topology &topo, const PowerSharingVector &eta,
                               CoefficientConvention conv = CoefficientConvention::stream_consistent)
    {
        return ClosedFormModel(cfg, topo).evaluate(eta, conv);
    }

} // namespace cran
