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

// Differential evolution with an elite archive over the guarded box
// [guard, 1 - guard]^D. Maximizes the objective.

#include "linalg.hpp"
#include "parallel.hpp"
#include "sysmodel.hpp"

#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace cran
{
    struct DeaParams
    {
        int population_size = 40;
        int max_generations = 300;
        double crossover_min = 0.1; // C_r ~ U[min, max] per individual per generation
        double crossover_max = 0.9;
        double archive_fraction = 0.1; // elite archive = top fraction by fitness
        double guard = default_guard;
        std::uint64_t seed = 1;
        bool seed_baseline = true; // pin individual 0 to `baseline`
        double baseline = 0.5;

        int archive_size() const
        {
            return std::max(1, static_cast<int>(std::lround(archive_fraction * population_size)));
        }

        void validate() const
        {
            if (population_size < 4)
                throw std::invalid_argument("DeaParams: population_size must be at least 4.");
            if (max_generations < 0)
                throw std::invalid_argument("DeaParams: max_generations must be nonnegative.");
            if (!(crossover_min >= 0.0 && crossover_min <= crossover_max && crossover_max <= 1.0))
                throw std::invalid_argument("DeaParams: need 0 <= crossover_min <= crossover_max <= 1.");
            if (!(archive_fraction > 0.0 && archive_fraction <= 1.0))
                throw std::invalid_argument("DeaParams: archive_fraction must lie in (0, 1].");
            if (!(guard >= 0.0 && guard < 0.5))
                throw std::invalid_argument("DeaParams: guard must lie in [0, 0.5).");
        }
    };

    struct Individual
    {
        std::vector<double> genes;
        std::optional<double> fitness;
    };

    using Population = std::vector<Individual>;
    using Objective = std::function<double(const std::vector<double> &)>;

    namespace detail
    {
        // Uniform on (0, 1]
        inline double unit_open_closed(Rng &rng)
        {
            return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        }

        // Stream for (generation, individual); generation 0 is initialization.
        inline Rng individual_stream(std::uint64_t seed, int generation, int index)
        {
            return substream(seed, static_cast<std::uint64_t>(generation), static_cast<std::uint64_t>(index));
        }

        inline double evaluate_safely(const Objective &f, const std::vector<double> &genes)
        {
            try
            {
                return f(genes);
            }
            catch (const InfeasibleBudgetError &)
            {
                return -std::numeric_limits<double>::infinity();
            }
        }
    } // namespace detail

    inline void clamp_genes(std::vector<double> &genes, double guard)
    {
        for (double &g : genes)
            g = std::clamp(g, guard, 1.0 - guard);
    }

    // Uniform over the guarded box; fitness left unset.
    inline Population initialize(int dim, const DeaParams &params)
    {
        params.validate();
        if (dim < 1)
            throw std::invalid_argument("initialize: dimension must be positive.");
        Population pop(static_cast<std::size_t>(params.population_size));
        for (int i = 0; i < params.population_size; ++i)
        {
            Rng rng = detail::individual_stream(params.seed, 0, i);
            std::uniform_real_distribution<double> u(params.guard, 1.0 - params.guard);
            auto &genes = pop[static_cast<std::size_t>(i)].genes;
            genes.resize(static_cast<std::size_t>(dim));
            for (double &g : genes)
                g = u(rng);
        }
        if (params.seed_baseline)
        {
            auto &genes = pop.front().genes;
            std::fill(genes.begin(), genes.end(), std::clamp(params.baseline, params.guard, 1.0 - params.guard));
        }
        return pop;
    }

    inline void evaluate(Population &pop, const Objective &objective)
    {
        parallel_for(pop.size(), [&](std::size_t i) {
            if (!pop[i].fitness)
                pop[i].fitness = detail::evaluate_safely(objective, pop[i].genes);
        });
    }

    // Indices of the best `size` individuals, best first; ties keep the lower index.
    inline std::vector<int> elite_archive(const Population &pop, int size)
    {
        std::vector<int> order(pop.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return pop[static_cast<std::size_t>(a)].fitness.value() > pop[static_cast<std::size_t>(b)].fitness.value();
        });
        order.resize(static_cast<std::size_t>(std::min<int>(size, static_cast<int>(order.size()))));
        return order;
    }

    // Random choices of one mutation
    struct MutationDraw
    {
        double scale = 0.0; // lambda in (0, 1]
        int elite = 0;      // population index of the archive member
        int first = 0;      // p'
        int second = 0;     // p''
    };

    inline MutationDraw draw_mutation(std::size_t pop_size, const std::vector<int> &archive, int target, Rng &rng)
    {
        if (pop_size < 4)
            throw std::invalid_argument("mutate: population needs at least 4 members.");
        if (archive.empty())
            throw std::invalid_argument("mutate: elite archive is empty.");
        MutationDraw d;
        d.scale = detail::unit_open_closed(rng);
        std::uniform_int_distribution<int> pick(0, static_cast<int>(pop_size) - 1);
        do
            d.first = pick(rng);
        while (d.first == target);
        do
            d.second = pick(rng);
        while (d.second == target || d.second == d.first);
        std::uniform_int_distribution<std::size_t> pick_elite(0, archive.size() - 1);
        d.elite = archive[pick_elite(rng)];
        return d;
    }

    // eta + lambda (eta_elite - eta) + lambda (eta_p' - eta_p''), clamped
    inline std::vector<double> apply_mutation(const std::vector<double> &target, const std::vector<double> &elite,
                                              const std::vector<double> &first, const std::vector<double> &second,
                                              double scale, double guard)
    {
        if (elite.size() != target.size() || first.size() != target.size() || second.size() != target.size())
            throw std::invalid_argument("mutate: gene vectors differ in length.");
        std::vector<double> out(target.size());
        for (std::size_t a = 0; a < target.size(); ++a)
            out[a] = target[a] + scale * (elite[a] - target[a]) + scale * (first[a] - second[a]);
        clamp_genes(out, guard);
        return out;
    }

    inline std::vector<double> mutate(const Population &pop, const std::vector<int> &archive, int target,
                                      double guard, Rng &rng)
    {
        const auto d = draw_mutation(pop.size(), archive, target, rng);
        return apply_mutation(pop[static_cast<std::size_t>(target)].genes, pop[static_cast<std::size_t>(d.elite)].genes,
                              pop[static_cast<std::size_t>(d.first)].genes,
                              pop[static_cast<std::size_t>(d.second)].genes, d.scale, guard);
    }

    // Element a comes from the mutant iff rand_a <= C_r, rand_a ~ U(0, 1].
    inline std::vector<double> crossover(const std::vector<double> &parent, const std::vector<double> &mutant,
                                         double crossover_prob, Rng &rng)
    {
        if (parent.size() != mutant.size())
            throw std::invalid_argument("crossover: vectors differ in length.");
        std::vector<double> trial(parent.size());
        for (std::size_t a = 0; a < parent.size(); ++a)
            trial[a] = detail::unit_open_closed(rng) <= crossover_prob ? mutant[a] : parent[a];
        return trial;
    }

    // Greedy one-to-one selection; ties go to the trial.
    inline const Individual &select(const Individual &parent, const Individual &trial)
    {
        return trial.fitness.value() >= parent.fitness.value() ? trial : parent;
    }

    struct GenerationStats
    {
        int generation = 0;
        double best = 0.0;
        double mean = 0.0; // over finite fitness values
    };

    struct DeaResult
    {
        std::vector<double> best_genes;
        double best_fitness = -std::numeric_limits<double>::infinity();
        std::vector<double> best_history; // index 0 = initial population
        std::vector<double> mean_history;
        Population final_population;
    };

    using ProgressCallback = std::function<void(const GenerationStats &)>;

    namespace detail
    {
        inline GenerationStats population_stats(const Population &pop, int generation)
        {
            GenerationStats st{generation, -std::numeric_limits<double>::infinity(), 0.0};
            int finite = 0;
            for (const auto &ind : pop)
            {
                const double f = ind.fitness.value();
                st.best = std::max(st.best, f);
                if (std::isfinite(f))
                {
                    st.mean += f;
                    ++finite;
                }
            }
            st.mean = finite ? st.mean / finite : -std::numeric_limits<double>::infinity();
            return st;
        }
    } // namespace detail

    // Generation-synchronous: trial vectors are built from the generation-g
    // population with per-individual streams, then evaluated concurrently.
    inline DeaResult optimize(const Objective &objective, int dim, const DeaParams &params,
                              const ProgressCallback &progress = {})
    {
        Population pop = initialize(dim, params);
        evaluate(pop, objective);

        DeaResult res;
        auto record = [&](int g) {
            const auto st = detail::population_stats(pop, g);
            res.best_history.push_back(st.best);
            res.mean_history.push_back(st.mean);
            if (progress)
                progress(st);
        };
        record(0);

        const int archive_size = params.archive_size();
        for (int g = 1; g <= params.max_generations; ++g)
        {
            const auto archive = elite_archive(pop, archive_size);
            Population trials(pop.size());
            for (std::size_t i = 0; i < pop.size(); ++i)
            {
                Rng rng = detail::individual_stream(params.seed, g, static_cast<int>(i));
                const double cr = std::uniform_real_distribution<double>(params.crossover_min, params.crossover_max)(rng);
                const auto mutant = mutate(pop, archive, static_cast<int>(i), params.guard, rng);
                trials[i].genes = crossover(pop[i].genes, mutant, cr, rng);
            }
            evaluate(trials, objective);
            for (std::size_t i = 0; i < pop.size(); ++i)
                pop[i] = select(pop[i], trials[i]);
            record(g);
        }

        const auto best = elite_archive(pop, 1).front();
        res.best_genes = pop[static_cast<std::size_t>(best)].genes;
        res.best_fitness = pop[static_cast<std::size_t>(best)].fitness.value();
        res.final_population = std::move(pop);
        return res;
    }

} // namespace cran
