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

// Experiment harness: parameter sweeps to CSV, the headline gain, and a
// pass/fail self-validation table.

#include "closedrate.hpp"
#include "dea.hpp"
#include "mcoracle.hpp"

#include <chrono>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace cran
{
    inline const std::vector<std::string> &sweep_parameters()
    {
        static const std::vector<std::string> names{"M", "N", "K", "R", "rho", "k_rice_db"};
        return names;
    }

    inline const std::vector<std::string> &sweep_modes()
    {
        static const std::vector<std::string> names{"closed_nonopt", "closed_opt", "mc_nonopt", "mc_opt"};
        return names;
    }

    // Config with one swept parameter replaced. K and R re-partition the UDs evenly.
    inline SystemConfig apply_parameter(SystemConfig cfg, const std::string &name, double value)
    {
        const auto as_count = [&](double v) {
            if (v < 1.0 || v != std::floor(v))
                throw std::invalid_argument("parameter " + name + " needs a positive integer value.");
            return static_cast<int>(v);
        };
        if (name == "M")
            cfg.rru_antennas = as_count(value);
        else if (name == "N")
            cfg.bbu_antennas = as_count(value);
        else if (name == "K")
        {
            cfg.num_uds = as_count(value);
            cfg.uds_per_rru = even_partition(cfg.num_uds, cfg.num_rrus);
        }
        else if (name == "R")
        {
            cfg.num_rrus = as_count(value);
            cfg.uds_per_rru = even_partition(cfg.num_uds, cfg.num_rrus);
        }
        else if (name == "rho")
            cfg.correlation_rho = value;
        else if (name == "k_rice_db")
            cfg.rician_db = value;
        else
            throw std::invalid_argument("unknown sweep parameter: " + name);
        cfg.validate();
        return cfg;
    }

    struct SweepSpec
    {
        std::string param = "M";
        std::vector<double> values;
        std::vector<std::string> modes{"closed_nonopt", "closed_opt"};
        std::vector<std::uint64_t> seeds{1};
        int realizations = 400;
        std::uint64_t topology_seed = 1;
        DeaParams dea{};
        bool timing = true;

        void validate() const
        {
            const auto &p = sweep_parameters();
            if (std::find(p.begin(), p.end(), param) == p.end())
                throw std::invalid_argument("unknown sweep parameter: " + param);
            if (values.empty())
                throw std::invalid_argument("sweep needs at least one value.");
            for (std::size_t i = 1; i < values.size(); ++i)
                if (!(values[i] > values[i - 1]))
                    throw std::invalid_argument("sweep values must be strictly ascending.");
            if (modes.empty())
                throw std::invalid_argument("sweep needs at least one mode.");
            const auto &m = sweep_modes();
            for (const auto &mode : modes)
                if (std::find(m.begin(), m.end(), mode) == m.end())
                    throw std::invalid_argument("unknown mode: " + mode);
            if (seeds.empty())
                throw std::invalid_argument("sweep needs at least one seed.");
            if (realizations < 2)
                throw std::invalid_argument("realizations must be at least 2.");
            dea.validate();
        }
    };

    struct ResultRow
    {
        std::string param;
        double value = 0.0;
        std::string mode;
        std::uint64_t seed = 0;
        double sum_rate = 0.0;
        double stderr_ = 0.0; // zero for closed-form modes
        double wall_ms = 0.0;
        std::vector<double> per_ud_rate;
    };

    inline const char *csv_header() { return "param,value,mode,seed,sum_rate,stderr,wall_ms"; }

    inline void write_csv(std::ostream &out, const std::vector<ResultRow> &rows)
    {
        out << csv_header() << '\n';
        out << std::setprecision(10);
        for (const auto &r : rows)
            out << r.param << ',' << r.value << ',' << r.mode << ',' << r.seed << ',' << r.sum_rate << ','
                << r.stderr_ << ',' << std::fixed << std::setprecision(1) << r.wall_ms << std::defaultfloat
                << std::setprecision(10) << '\n';
    }

    // DEA over the closed form; returns the best power-sharing vector.
    inline DeaResult optimize_power_sharing(const ClosedFormModel &model, const DeaParams &params,
                                            const ProgressCallback &progress = {})
    {
        const Objective f = [&model](const std::vector<double> &genes) {
            return model.sum_rate(PowerSharingVector::from_flat(genes));
        };
        return optimize(f, 2 * model.config().num_uds, params, progress);
    }

    // Rows ordered by (value, mode, seed) as listed in the spec.
    inline std::vector<ResultRow> run_sweep(const SystemConfig &base, const SweepSpec &spec)
    {
        spec.validate();
        using clock = std::chrono::steady_clock;
        std::vector<ResultRow> rows;
        for (double value : spec.values)
        {
            const SystemConfig cfg = apply_parameter(base, spec.param, value);
            const Topology topo = place_topology(cfg, spec.topology_seed);
            const ClosedFormModel model(cfg, topo);
            const auto baseline = PowerSharingVector::uniform(cfg.num_uds, 0.5);
            std::map<std::uint64_t, PowerSharingVector> optimized;
            const auto optimized_for = [&](std::uint64_t seed) -> const PowerSharingVector & {
                auto it = optimized.find(seed);
                if (it == optimized.end())
                {
                    DeaParams p = spec.dea;
                    p.seed = seed;
                    it = optimized
                             .emplace(seed, PowerSharingVector::from_flat(optimize_power_sharing(model, p).best_genes))
                             .first;
                }
                return it->second;
            };

            for (const auto &mode : spec.modes)
                for (std::uint64_t seed : spec.seeds)
                {
                    const auto t0 = clock::now();
                    ResultRow row;
                    row.param = spec.param;
                    row.value = value;
                    row.mode = mode;
                    row.seed = seed;
                    const bool opt = mode.ends_with("_opt");
                    const PowerSharingVector &eta = opt ? optimized_for(seed) : baseline;
                    if (mode.starts_with("closed"))
                    {
                        const auto rep = model.evaluate(eta);
                        row.sum_rate = rep.sum_rate;
                        row.per_ud_rate = rep.rate;
                    }
                    else
                    {
                        const auto emp = ergodic_rate(cfg, topo, eta, spec.realizations, seed);
                        row.sum_rate = emp.sum_rate;
                        row.stderr_ = emp.sum_rate_stderr;
                        row.per_ud_rate = emp.rate;
                    }
                    if (spec.timing)
                        row.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
                    rows.push_back(std::move(row));
                }
        }
        return rows;
    }

    struct HeadlineReport
    {
        double baseline = 0.0;
        double optimized = 0.0;
        double gain_percent = 0.0;
        std::uint64_t best_seed = 0;
        std::vector<double> best_genes;
        bool passed = false;
    };

    inline constexpr double headline_gain_threshold = 20.0; // percent

    // Best DEA result over `seeds` against the all-0.5 baseline.
    inline HeadlineReport reproduce_headline(const SystemConfig &cfg, std::uint64_t topology_seed,
                                             const DeaParams &params, const std::vector<std::uint64_t> &seeds,
                                             const ProgressCallback &progress = {})
    {
        if (seeds.empty())
            throw std::invalid_argument("reproduce_headline: need at least one seed.");
        const ClosedFormModel model(cfg, place_topology(cfg, topology_seed));
        HeadlineReport rep;
        rep.baseline = model.sum_rate(PowerSharingVector::uniform(cfg.num_uds, 0.5));
        rep.optimized = -std::numeric_limits<double>::infinity();
        for (auto seed : seeds)
        {
            DeaParams p = params;
            p.seed = seed;
            const auto res = optimize_power_sharing(model, p, progress);
            if (res.best_fitness > rep.optimized)
            {
                rep.optimized = res.best_fitness;
                rep.best_seed = seed;
                rep.best_genes = res.best_genes;
            }
        }
        rep.gain_percent = 100.0 * (rep.optimized - rep.baseline) / rep.baseline;
        rep.passed = rep.gain_percent >= headline_gain_threshold;
        return rep;
    }

    // ---------- Self validation ----------

    struct ValidationCheck
    {
        std::string name;
        bool passed = false;
        std::string detail;
    };

    struct ValidationOptions
    {
        bool quick = false;
        double oracle_tolerance = 0.07; // relative closed-form vs oracle gap
        std::uint64_t seed = 1;
    };

    // The scaled configuration used for closed-form vs oracle comparisons
    inline SystemConfig scaled_config()
    {
        SystemConfig cfg;
        cfg.rru_antennas = 16;
        cfg.bbu_antennas = 32;
        cfg.num_uds = 4;
        cfg.num_rrus = 2;
        cfg.uds_per_rru = {2, 2};
        return cfg;
    }

    namespace detail
    {
        inline std::string fmt(double v)
        {
            std::ostringstream os;
            os << std::setprecision(4) << v;
            return os.str();
        }
    } // namespace detail

    inline std::vector<ValidationCheck> run_validation(const ValidationOptions &opt)
    {
        std::vector<ValidationCheck> out;

        {
            // Covariance decomposition over a grid of pilot powers, both layers
            const SystemConfig cfg;
            const RMatrix ra = exp_correlation(cfg.rru_antennas, cfg.correlation_rho);
            const RMatrix rb = exp_correlation(cfg.bbu_antennas, cfg.correlation_rho);
            const double zeta = rician_weights(cfg.rician_db).zeta;
            const double noise = cfg.noise_variance();
            double worst = 0.0;
            for (int i = 0; i < 10; ++i)
            {
                const double p = noise * std::pow(10.0, -2.0 + 0.5 * i);
                const auto a = access_cov(ra, p, noise);
                const auto f = fronthaul_cov(rb, zeta, p, noise);
                worst = std::max(worst, relative_frobenius(a.estimate + a.error, ra.cast<cplx>()));
                worst = std::max(worst, relative_frobenius(f.estimate + f.error, (zeta * zeta) * rb.cast<cplx>()));
            }
            out.push_back({"covariance decomposition", worst <= 1e-10, "max rel err " + detail::fmt(worst)});
        }

        {
            // Spectral closed form vs explicit-matrix transcription
            const SystemConfig cfg = scaled_config();
            const ClosedFormModel model(cfg, place_topology(cfg, 1));
            const auto eta = PowerSharingVector::uniform(cfg.num_uds, 0.5);
            const auto lb = model.budget(eta);
            const auto fast = assemble_report(model.terms(lb), lb);
            const auto ref = assemble_report(model.reference_terms(eta), lb);
            const double err = std::abs(fast.sum_rate - ref.sum_rate) / ref.sum_rate;
            out.push_back({"closed form spectral vs explicit", err <= 1e-9, "rel diff " + detail::fmt(err)});
        }

        {
            const SystemConfig cfg;
            const ClosedFormModel model(cfg, place_topology(cfg, 1));
            const auto &lam = model.lambda();
            double err = std::abs(lam.fronthaul - 1.0 / cfg.bbu_antennas) * cfg.bbu_antennas;
            for (double l : lam.access)
                err = std::max(err, std::abs(l - 1.0 / cfg.rru_antennas) * cfg.rru_antennas);
            out.push_back({"normalization factors", err <= 1e-12, "max rel err " + detail::fmt(err)});
        }

        {
            const auto rep = check_lemmas({100, 1000, 10000}, 100, {8, 64}, 1000, opt.seed);
            const auto &big = rep.concentration.back();
            const bool conc = big.inner_product < 0.02 && big.self_norm < 0.02 && big.quadratic < 0.02;
            const bool gap = rep.ratio_gap[1].gap < rep.ratio_gap[0].gap;
            out.push_back({"concentration at N=1e4", conc,
                           "inner " + detail::fmt(big.inner_product) + ", norm " + detail::fmt(big.self_norm) +
                               ", quad " + detail::fmt(big.quadratic)});
            out.push_back({"ratio-of-means gap shrinks", gap,
                           "M=8 " + detail::fmt(rep.ratio_gap[0].gap) + ", M=64 " + detail::fmt(rep.ratio_gap[1].gap)});
        }

        {
            const Objective sphere = [](const std::vector<double> &x) {
                double s = 0.0;
                for (double v : x)
                    s -= (v - 0.3) * (v - 0.3);
                return s;
            };
            DeaParams p;
            p.max_generations = 200;
            p.seed = opt.seed;
            const auto res = optimize(sphere, 20, p);
            double dev = 0.0;
            for (double g : res.best_genes)
                dev = std::max(dev, std::abs(g - 0.3));
            bool monotone = std::is_sorted(res.best_history.begin(), res.best_history.end());
            out.push_back({"optimizer sphere benchmark", dev <= 0.01 && monotone, "max |gene-0.3| " + detail::fmt(dev)});
        }

        {
            const SystemConfig cfg = scaled_config();
            const Topology topo = place_topology(cfg, 1);
            const auto eta = PowerSharingVector::uniform(cfg.num_uds, 0.5);
            const double closed = sum_rate(cfg, topo, eta).sum_rate;
            const auto emp = ergodic_rate(cfg, topo, eta, opt.quick ? 200 : 400, opt.seed);
            const double rel = std::abs(closed - emp.sum_rate) / emp.sum_rate;
            out.push_back({"closed form vs oracle (scaled)", rel <= opt.oracle_tolerance,
                           "closed " + detail::fmt(closed) + ", oracle " + detail::fmt(emp.sum_rate) + ", rel " +
                               detail::fmt(rel) + " (tol " + detail::fmt(opt.oracle_tolerance) + ")"});
        }
        return out;
    }

    inline bool print_validation(std::ostream &out, const std::vector<ValidationCheck> &checks)
    {
        bool all = true;
        for (const auto &c : checks)
        {
            out << (c.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(36) << c.name << c.detail << '\n';
            all = all && c.passed;
        }
        out << (all ? "all checks passed" : "some checks FAILED") << '\n';
        return all;
    }

} // namespace cran
