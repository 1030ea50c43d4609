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

#include <cran/closedrate.hpp>
#include <cran/mcoracle.hpp>

#include <catch_amalgamated.hpp>

#include <cstdlib>

using namespace cran;
using Catch::Approx;

namespace
{
    SystemConfig scaled()
    {
        SystemConfig cfg;
        cfg.rru_antennas = 16;
        cfg.bbu_antennas = 32;
        cfg.num_uds = 4;
        cfg.num_rrus = 2;
        cfg.uds_per_rru = {2, 2};
        return cfg;
    }

    SystemConfig single_ud(int m)
    {
        SystemConfig cfg;
        cfg.rru_antennas = m;
        cfg.bbu_antennas = 16;
        cfg.num_uds = 1;
        cfg.num_rrus = 1;
        cfg.uds_per_rru = {1};
        return cfg;
    }
} // namespace

TEST_CASE("realization shapes")
{
    const auto cfg = scaled();
    const auto topo = place_topology(cfg, 1);
    Rng rng = make_rng(1);
    const auto res = simulate_once(cfg, topo, PowerSharingVector::uniform(4, 0.5), rng);
    const auto &ch = res.realization;
    CHECK(ch.access_combiner(0).rows() == 2);
    CHECK(ch.access_combiner(0).cols() == 16);
    CHECK(ch.fronthaul_combiner().rows() == 4);
    CHECK(ch.fronthaul_combiner().cols() == 32);
    for (double a : ch.amplification)
        CHECK(a > 0.0);
    CHECK(res.terms.size() == 4);
}

TEST_CASE("source decomposition equals the covariance-route output power")
{
    for (const auto &cfg : {scaled(), SystemConfig{}})
    {
        const auto topo = place_topology(cfg, 2);
        const OracleSetup setup(cfg, topo, PowerSharingVector::uniform(cfg.num_uds, 0.4));
        for (int i = 0; i < 5; ++i)
        {
            Rng rng = substream(9, static_cast<std::uint64_t>(i));
            for (const auto &t : simulate_once(setup, rng).terms)
            {
                CHECK(std::abs(t.full_sum() - t.total_output) <= 1e-8 * t.total_output);
                for (double v : {t.desired, t.inter_stream, t.inter_rru, t.noise, t.intra_rru_leakage,
                                 t.other_stream_noise, t.full_desired, t.full_co_rru, t.full_other_rru, t.full_noise})
                    CHECK(v >= 0.0);
            }
        }
    }
}

TEST_CASE("zero data power removes the desired term")
{
    const auto cfg = scaled();
    const auto topo = place_topology(cfg, 1);
    OracleSetup setup(cfg, topo, PowerSharingVector::uniform(4, 0.5));
    setup.budget.rx_access_data.col(2).setZero();
    Rng rng = make_rng(3);
    const auto res = simulate_once(setup, rng);
    CHECK(res.terms[2].desired == 0.0);
    CHECK(res.terms[2].full_desired == 0.0);
    CHECK(res.terms[0].desired > 0.0);
}

TEST_CASE("array gain: SINR doubles with M under perfect CSI")
{
    OracleOptions opt;
    opt.perfect_access_csi = true;
    opt.perfect_fronthaul_csi = true;
    opt.fronthaul_noise_scale = 0.0;
    std::vector<double> x, y;
    for (int m : {16, 32, 64})
    {
        const auto cfg = single_ud(m);
        const auto topo = place_topology(cfg, 1);
        const OracleSetup setup(cfg, topo, PowerSharingVector::uniform(1, 0.5), opt);
        double mean = 0.0;
        for (int i = 0; i < 200; ++i)
        {
            Rng rng = substream(5, static_cast<std::uint64_t>(i));
            const auto t = simulate_once(setup, rng).terms[0];
            CHECK(t.inter_stream == 0.0);
            CHECK(t.inter_rru == 0.0);
            mean += t.sinr() / 200.0;
        }
        x.push_back(std::log2(static_cast<double>(m)));
        y.push_back(10.0 * std::log10(mean));
    }
    // least-squares slope in dB per doubling
    const double xm = (x[0] + x[1] + x[2]) / 3.0, ym = (y[0] + y[1] + y[2]) / 3.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 3; ++i)
    {
        num += (x[static_cast<std::size_t>(i)] - xm) * (y[static_cast<std::size_t>(i)] - ym);
        den += (x[static_cast<std::size_t>(i)] - xm) * (x[static_cast<std::size_t>(i)] - xm);
    }
    CHECK(num / den == Approx(10.0 * std::log10(2.0)).margin(0.5));
}

TEST_CASE("ergodic rate is reproducible and independent of the thread count")
{
    const auto cfg = scaled();
    const auto topo = place_topology(cfg, 1);
    const auto eta = PowerSharingVector::uniform(4, 0.5);
    ::setenv("CRAN_THREADS", "1", 1);
    const auto a = ergodic_rate(cfg, topo, eta, 64, 77);
    ::setenv("CRAN_THREADS", "5", 1);
    const auto b = ergodic_rate(cfg, topo, eta, 64, 77);
    ::unsetenv("CRAN_THREADS");
    const auto c = ergodic_rate(cfg, topo, eta, 64, 78);
    CHECK(a.sum_rate == b.sum_rate);
    CHECK(a.rate == b.rate);
    CHECK(a.sum_rate_stderr == b.sum_rate_stderr);
    CHECK(a.sum_rate != c.sum_rate);
    CHECK_THROWS_AS(ergodic_rate(cfg, topo, eta, 1, 1), std::invalid_argument);
}

TEST_CASE("standard error shrinks like the square root of the sample size")
{
    const auto cfg = scaled();
    const auto topo = place_topology(cfg, 1);
    const auto eta = PowerSharingVector::uniform(4, 0.5);
    const auto small = ergodic_rate(cfg, topo, eta, 400, 11);
    const auto large = ergodic_rate(cfg, topo, eta, 800, 11);
    CHECK(small.sum_rate_stderr / large.sum_rate_stderr == Approx(std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("oracle matches the closed form at the scaled configuration")
{
    const auto cfg = scaled();
    const auto topo = place_topology(cfg, 1);
    const auto eta = PowerSharingVector::uniform(4, 0.5);
    const auto emp = ergodic_rate(cfg, topo, eta, 400, 1);
    const double closed = sum_rate(cfg, topo, eta).sum_rate;
    CHECK(std::abs(closed - emp.sum_rate) / emp.sum_rate <= 0.07);
    CHECK(emp.ratio_of_means_sum > 0.0);
    CHECK(emp.full_chain_sum > 0.0);
}

TEST_CASE("mean desired power converges to its exact expectation")
{
    const SystemConfig cfg;
    const auto topo = place_topology(cfg, 1);
    const auto eta = PowerSharingVector::uniform(10, 0.5);
    const OracleSetup setup(cfg, topo, eta);
    const int n = 400;
    std::vector<double> sum(10, 0.0), sum_sq(10, 0.0);
    for (int i = 0; i < n; ++i)
    {
        Rng rng = substream(31, static_cast<std::uint64_t>(i));
        const auto terms = simulate_once(setup, rng).terms;
        for (std::size_t k = 0; k < 10; ++k)
        {
            sum[k] += terms[k].desired;
            sum_sq[k] += terms[k].desired * terms[k].desired;
        }
    }

    // Exact Gaussian moments: with h = h_hat + h_tilde (independent),
    //   E|h_hat^H h|^2 = (Tr P)^2 + Tr P^2 + Tr{P E}
    // and for the fronthaul with mean mu = nu h_d,
    //   E|g_hat^H g|^2 = (|mu|^2 + Tr Q)^2 + Tr Q^2 + 2 mu^H Q mu + mu^H F mu + Tr{Q F}.
    const auto lb = build_link_budget(cfg, topo, eta);
    const RMatrix ra = exp_correlation(cfg.rru_antennas, cfg.correlation_rho);
    const RMatrix rb = exp_correlation(cfg.bbu_antennas, cfg.correlation_rho);
    const auto w = rician_weights(cfg.rician_db);
    const CMatrix hd = los_matrix(cfg.bbu_antennas, topo);
    const double lam_b = 1.0 / cfg.bbu_antennas;
    const double lam_a = 1.0 / cfg.rru_antennas;

    const ClosedFormModel model(cfg, topo);
    const auto t = model.terms(lb);
    for (int k = 0; k < 10; ++k)
    {
        const auto kk = static_cast<std::size_t>(k);
        const auto acc = access_cov(ra, lb.serving_pilot(k), lb.noise_access);
        const auto fro = fronthaul_cov(rb, w.zeta, lb.rx_fronthaul_pilot[kk], lb.noise_fronthaul);
        const double trp = acc.estimate.trace().real();
        const double access_moment =
            trp * trp + (acc.estimate * acc.estimate).trace().real() + (acc.estimate * acc.error).trace().real();
        const CVector mu = w.nu * hd.col(k);
        const double trq = fro.estimate.trace().real();
        const double mq = mu.dot(fro.estimate * mu).real();
        const double fronthaul_moment = (mu.squaredNorm() + trq) * (mu.squaredNorm() + trq) +
                                        (fro.estimate * fro.estimate).trace().real() + 2.0 * mq +
                                        mu.dot(fro.error * mu).real() + (fro.estimate * fro.error).trace().real();
        const double exact = (1.0 / lb.serving_data(k)) * lam_a * lam_b * lb.rx_fronthaul_data[kk] *
                             lb.serving_data(k) * access_moment * fronthaul_moment;

        const double mean = sum[kk] / n;
        const double se = std::sqrt((sum_sq[kk] / n - mean * mean) / (n - 1));
        // 3 SE per UD, Bonferroni-widened for the 10 UDs checked jointly
        CHECK(std::abs(mean - exact) <= 3.6 * se);

        // The closed form keeps only the leading-order moments; the gap is O(1/M).
        const double closed = signal_power(k, t, lb) + interference_breakdown(k, t, lb).estimation_error;
        CHECK(closed < exact);
        CHECK((exact - closed) / exact < 2.0 / cfg.rru_antennas);
    }
}

TEST_CASE("concentration lemmas at large N")
{
    const auto stats = check_concentration({100, 1000, 10000}, 100, 5);
    REQUIRE(stats.size() == 3);
    const auto &big = stats.back();
    CHECK(big.n == 10000);
    CHECK(big.inner_product < 0.02);
    CHECK(big.self_norm < 0.02);
    CHECK(big.quadratic < 0.02);
    CHECK(stats.front().inner_product > big.inner_product);
    CHECK(stats.front().quadratic > big.quadratic);

    const auto identity = check_concentration({10000}, 100, 6, 1.0, 0.0);
    CHECK(identity[0].quadratic < 0.02);
}

TEST_CASE("recursive correlation product matches the dense matrix")
{
    Rng rng = make_rng(8);
    const CVector x = complex_gaussian(50, 1, rng);
    const CVector dense = exp_correlation(50, 0.3).cast<cplx>() * x;
    CHECK((detail::exp_correlation_apply(x, 0.3) - dense).norm() < 1e-12 * dense.norm());
}

TEST_CASE("ratio-of-means gap shrinks with dimension")
{
    const auto gap = check_ratio_gap({8, 64}, 1000, 3);
    CHECK(gap[1].gap < gap[0].gap);
    const auto rep = check_lemmas({100, 1000}, 20, {8, 16, 64}, 1000, 4);
    CHECK(rep.ratio_gap.size() == 3);
    CHECK_THROWS_AS(check_lemmas({1000, 100}, 20, {8}, 1000, 4), std::invalid_argument);
}
