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

#include <cran/expcli.hpp>

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace cran;

namespace
{
    SystemConfig small_config()
    {
        SystemConfig cfg;
        cfg.rru_antennas = 8;
        cfg.bbu_antennas = 16;
        cfg.num_uds = 4;
        cfg.num_rrus = 2;
        cfg.uds_per_rru = {2, 2};
        return cfg;
    }

    SweepSpec small_sweep()
    {
        SweepSpec spec;
        spec.param = "M";
        spec.values = {4, 8, 12};
        spec.modes = {"closed_nonopt", "mc_opt"};
        spec.seeds = {1, 2};
        spec.realizations = 20;
        spec.dea.population_size = 8;
        spec.dea.max_generations = 5;
        spec.timing = false;
        return spec;
    }

    std::string to_csv(const std::vector<ResultRow> &rows)
    {
        std::ostringstream os;
        write_csv(os, rows);
        return os.str();
    }
} // namespace

TEST_CASE("sweep produces one row per value, mode and seed in order")
{
    const auto rows = run_sweep(small_config(), small_sweep());
    REQUIRE(rows.size() == 12);
    std::size_t i = 0;
    for (double v : {4.0, 8.0, 12.0})
        for (const char *mode : {"closed_nonopt", "mc_opt"})
            for (std::uint64_t seed : {1u, 2u})
            {
                CHECK(rows[i].param == "M");
                CHECK(rows[i].value == v);
                CHECK(rows[i].mode == mode);
                CHECK(rows[i].seed == seed);
                CHECK(rows[i].sum_rate >= 0.0);
                CHECK(rows[i].per_ud_rate.size() == 4);
                CHECK(rows[i].wall_ms == 0.0);
                if (rows[i].mode.starts_with("closed"))
                    CHECK(rows[i].stderr_ == 0.0);
                else
                    CHECK(rows[i].stderr_ > 0.0);
                ++i;
            }
    // Non-optimized closed form does not depend on the seed
    CHECK(rows[0].sum_rate == rows[1].sum_rate);
}

TEST_CASE("csv output is byte-identical across reruns with timing disabled")
{
    const auto a = to_csv(run_sweep(small_config(), small_sweep()));
    const auto b = to_csv(run_sweep(small_config(), small_sweep()));
    CHECK(a == b);
    std::istringstream in(a);
    std::string header;
    std::getline(in, header);
    CHECK(header == "param,value,mode,seed,sum_rate,stderr,wall_ms");
    std::string line;
    int lines = 0;
    while (std::getline(in, line))
    {
        CHECK(std::count(line.begin(), line.end(), ',') == 6);
        CHECK(line.ends_with(",0.0"));
        ++lines;
    }
    CHECK(lines == 12);
}

TEST_CASE("a seed's rows do not depend on which other seeds are swept")
{
    auto spec = small_sweep();
    spec.values = {8};
    const auto both = run_sweep(small_config(), spec);
    spec.seeds = {2};
    const auto alone = run_sweep(small_config(), spec);
    REQUIRE(alone.size() == 2);
    CHECK(alone[0].sum_rate == both[1].sum_rate);
    CHECK(alone[1].sum_rate == both[3].sum_rate);
    CHECK(alone[1].stderr_ == both[3].stderr_);
}

TEST_CASE("invalid sweep specifications are rejected")
{
    auto spec = small_sweep();
    spec.param = "bandwidth";
    CHECK_THROWS_AS(run_sweep(small_config(), spec), std::invalid_argument);
    spec = small_sweep();
    spec.modes = {"closed_best"};
    CHECK_THROWS_AS(run_sweep(small_config(), spec), std::invalid_argument);
    spec = small_sweep();
    spec.values = {8, 4};
    CHECK_THROWS_AS(run_sweep(small_config(), spec), std::invalid_argument);
    spec = small_sweep();
    spec.values = {};
    CHECK_THROWS_AS(run_sweep(small_config(), spec), std::invalid_argument);
    spec = small_sweep();
    spec.realizations = 1;
    CHECK_THROWS_AS(run_sweep(small_config(), spec), std::invalid_argument);
}

TEST_CASE("apply_parameter replaces exactly one field")
{
    const SystemConfig base = small_config();
    CHECK(apply_parameter(base, "M", 32).rru_antennas == 32);
    CHECK(apply_parameter(base, "N", 64).bbu_antennas == 64);
    CHECK(apply_parameter(base, "rho", 0.4).correlation_rho == 0.4);
    CHECK(apply_parameter(base, "k_rice_db", -3).rician_db == -3);
    const auto k = apply_parameter(base, "K", 6);
    CHECK(k.num_uds == 6);
    CHECK(k.uds_per_rru == std::vector<int>{3, 3});
    const auto r = apply_parameter(base, "R", 4);
    CHECK(r.num_rrus == 4);
    CHECK(r.uds_per_rru == std::vector<int>{1, 1, 1, 1});
    CHECK_THROWS_AS(apply_parameter(base, "M", 2.5), std::invalid_argument);
    CHECK_THROWS_AS(apply_parameter(base, "K", 0), std::invalid_argument);
    CHECK_THROWS_AS(apply_parameter(base, "rho", 1.0), std::invalid_argument);
    CHECK_THROWS_AS(apply_parameter(base, "Q", 1.0), std::invalid_argument);
}

TEST_CASE("headline report for a single-UD system")
{
    SystemConfig cfg;
    cfg.rru_antennas = 4;
    cfg.bbu_antennas = 8;
    cfg.num_uds = 1;
    cfg.num_rrus = 1;
    cfg.uds_per_rru = {1};
    DeaParams p;
    p.population_size = 8;
    p.max_generations = 20;
    const auto rep = reproduce_headline(cfg, 1, p, {1, 2});
    CHECK(rep.baseline > 0.0);
    CHECK(rep.optimized >= rep.baseline);
    CHECK(rep.gain_percent >= 0.0);
    CHECK(rep.gain_percent == Catch::Approx(100.0 * (rep.optimized - rep.baseline) / rep.baseline));
    CHECK((rep.best_seed == 1 || rep.best_seed == 2));
    CHECK(rep.best_genes.size() == 2);
    CHECK(rep.passed == (rep.gain_percent >= headline_gain_threshold));
    CHECK_THROWS_AS(reproduce_headline(cfg, 1, p, {}), std::invalid_argument);
}

TEST_CASE("self validation passes and a zero oracle tolerance fails")
{
    ValidationOptions opt;
    opt.quick = true;
    const auto checks = run_validation(opt);
    REQUIRE(checks.size() == 7);
    std::ostringstream out;
    CHECK(print_validation(out, checks));
    CHECK(out.str().find("FAIL") == std::string::npos);

    opt.oracle_tolerance = 0.0;
    const auto strict = run_validation(opt);
    std::ostringstream out2;
    CHECK_FALSE(print_validation(out2, strict));
    CHECK_FALSE(strict.back().passed);
}
