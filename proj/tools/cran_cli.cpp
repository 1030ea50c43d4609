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

// cran_cli: sweep | headline | validate
// Exit codes: 0 success, 1 usage / input error, 2 validation failure.

#include <cran/expcli.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace
{
    constexpr int exit_usage = 1;
    constexpr int exit_failed = 2;

    cran::SystemConfig config_from(const std::string &path)
    {
        return path.empty() ? cran::SystemConfig{} : cran::load_config(path);
    }

    void print_progress(const cran::GenerationStats &st)
    {
        if (st.generation % 25 == 0)
            std::cerr << "gen " << st.generation << " best " << st.best << " mean " << st.mean << '\n';
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Two-layer C-RAN uplink: closed-form sum-rate, Monte-Carlo oracle, power-sharing optimization"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t topology_seed = 1;
    int population = 40;
    int generations = 300;
    bool verbose = false;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", config_path, "key = value configuration file");
        sub->add_option("--topology-seed", topology_seed, "seed for RRU/UD placement")->capture_default_str();
        sub->add_option("--population", population, "DEA population size")->capture_default_str();
        sub->add_option("--generations", generations, "DEA generations")->capture_default_str();
        sub->add_flag("-v,--verbose", verbose, "DEA progress on stderr");
    };

    cran::SweepSpec spec;
    std::string out_path;
    bool no_timing = false;
    auto *sweep = app.add_subcommand("sweep", "parameter sweep to CSV");
    add_common(sweep);
    sweep->add_option("--param", spec.param, "M | N | K | R | rho | k_rice_db")->required();
    sweep->add_option("--values", spec.values, "ascending values")->required()->delimiter(',');
    sweep->add_option("--modes", spec.modes, "closed_nonopt, closed_opt, mc_nonopt, mc_opt")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--seeds", spec.seeds, "DEA / Monte-Carlo seeds")->delimiter(',')->capture_default_str();
    sweep->add_option("--realizations", spec.realizations, "Monte-Carlo realizations")->capture_default_str();
    sweep->add_option("--out", out_path, "CSV path (stdout if omitted)");
    sweep->add_flag("--no-timing", no_timing, "write wall_ms = 0 for byte-identical reruns");

    std::vector<std::uint64_t> headline_seeds{1};
    auto *headline = app.add_subcommand("headline", "optimized vs equal power sharing at the configured defaults");
    add_common(headline);
    headline->add_option("--seeds", headline_seeds, "DEA seeds; best result reported")
        ->delimiter(',')
        ->capture_default_str();

    cran::ValidationOptions vopt;
    auto *validate = app.add_subcommand("validate", "run the self-check table");
    validate->add_flag("--quick", vopt.quick, "reduced realization count");
    validate->add_option("--oracle-tolerance", vopt.oracle_tolerance, "closed form vs oracle relative tolerance")
        ->capture_default_str();
    validate->add_option("--seed", vopt.seed, "seed for stochastic checks")->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    cran::DeaParams dea;
    dea.population_size = population;
    dea.max_generations = generations;
    const cran::ProgressCallback progress = verbose ? cran::ProgressCallback(print_progress) : cran::ProgressCallback{};

    try
    {
        if (*sweep)
        {
            spec.topology_seed = topology_seed;
            spec.dea = dea;
            spec.timing = !no_timing;
            const auto cfg = config_from(config_path);
            const auto rows = cran::run_sweep(cfg, spec);
            if (out_path.empty())
                cran::write_csv(std::cout, rows);
            else
            {
                std::ofstream out(out_path);
                if (!out)
                    throw std::runtime_error("cannot write " + out_path);
                cran::write_csv(out, rows);
                if (!out)
                    throw std::runtime_error("write failed: " + out_path);
            }
            return 0;
        }
        if (*headline)
        {
            const auto cfg = config_from(config_path);
            const auto rep = cran::reproduce_headline(cfg, topology_seed, dea, headline_seeds, progress);
            std::cout << "baseline sum-rate (eta = 0.5): " << rep.baseline << " bits/s/Hz\n"
                      << "optimized sum-rate:            " << rep.optimized << " bits/s/Hz (seed " << rep.best_seed
                      << ")\n"
                      << "gain:                          " << rep.gain_percent << " %\n"
                      << (rep.passed ? "PASS" : "FAIL") << " (threshold " << cran::headline_gain_threshold << " %)\n";
            return rep.passed ? 0 : exit_failed;
        }
        if (*validate)
            return cran::print_validation(std::cout, cran::run_validation(vopt)) ? 0 : exit_failed;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return exit_usage;
    }
    catch (const std::runtime_error &e)
    {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return exit_usage;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failed;
    }
    return exit_usage;
}
