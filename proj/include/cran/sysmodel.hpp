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

// System configuration, deployment geometry and the power budgets of the
// two-layer uplink: user devices (UDs) -> remote radio units (RRUs) -> baseband unit (BBU).

#include "linalg.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <span>
#include <sstream>
#include <string_view>
#include <utility>
#include <vector>

namespace cran
{
    // Raised when the RRU signal-processing power leaves nothing for forwarding.
    class InfeasibleBudgetError : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    struct Point
    {
        double x = 0.0;
        double y = 0.0;
    };

    inline double distance(const Point &a, const Point &b) { return std::hypot(a.x - b.x, a.y - b.y); }

    // Half-width of the square BBU coverage area [-A, A]^2 in meters
    inline const double coverage_half_width = 500.0 * std::sqrt(2.0);

    // Most even partition of K UDs over R RRUs, larger counts at the higher RRU indices.
    inline std::vector<int> even_partition(int num_uds, int num_rrus)
    {
        if (num_rrus < 1 || num_uds < num_rrus)
            throw std::invalid_argument("even_partition: need num_uds >= num_rrus >= 1.");
        std::vector<int> counts(static_cast<std::size_t>(num_rrus), num_uds / num_rrus);
        const int extra = num_uds % num_rrus;
        for (int r = num_rrus - extra; r < num_rrus; ++r)
            ++counts[static_cast<std::size_t>(r)];
        return counts;
    }

    struct SystemConfig
    {
        double bandwidth_hz = 10e6;
        int num_uds = 10;
        int num_rrus = 4;
        std::vector<int> uds_per_rru{2, 2, 3, 3};
        int rru_antennas = 32;
        int bbu_antennas = 128;
        double correlation_rho = 0.1;
        double rician_db = 10.0;
        double receiver_efficiency = 0.1;
        double noise_psd_dbm_hz = -174.0;
        double p_ud_watts = 0.2;
        double p_rru_watts = 10.0;
        double f_access_hz = 3.4e9;
        double f_fronthaul_ghz = 26.0;

        // Throws std::invalid_argument on the first violated invariant.
        void validate() const
        {
            if (num_uds < 1 || num_rrus < 1)
                throw std::invalid_argument("SystemConfig: num_uds and num_rrus must be positive.");
            if (static_cast<int>(uds_per_rru.size()) != num_rrus)
                throw std::invalid_argument("SystemConfig: uds_per_rru must have num_rrus entries.");
            if (std::accumulate(uds_per_rru.begin(), uds_per_rru.end(), 0) != num_uds)
                throw std::invalid_argument("SystemConfig: uds_per_rru must sum to num_uds.");
            for (int u : uds_per_rru)
            {
                if (u < 1)
                    throw std::invalid_argument("SystemConfig: every RRU must serve at least one UD.");
                if (u > rru_antennas)
                    throw std::invalid_argument("SystemConfig: U_r must not exceed the RRU antenna count M.");
            }
            if (num_uds > bbu_antennas)
                throw std::invalid_argument("SystemConfig: K must not exceed the BBU antenna count N.");
            if (!(correlation_rho >= 0.0 && correlation_rho < 1.0))
                throw std::invalid_argument("SystemConfig: correlation_rho must lie in [0, 1).");
            if (!(p_ud_watts > 0.0) || !(p_rru_watts > 0.0))
                throw std::invalid_argument("SystemConfig: powers must be positive.");
            if (!(bandwidth_hz > 0.0) || !(f_access_hz > 0.0) || !(f_fronthaul_ghz > 0.0))
                throw std::invalid_argument("SystemConfig: bandwidth and carriers must be positive.");
            if (!(receiver_efficiency >= 0.0))
                throw std::invalid_argument("SystemConfig: receiver_efficiency must be nonnegative.");
            if (std::isnan(rician_db) || std::isnan(noise_psd_dbm_hz))
                throw std::invalid_argument("SystemConfig: rician_db and noise_psd_dbm_hz must be numbers.");
        }

        // Noise variance in W for the configured PSD and bandwidth
        double noise_variance() const
        {
            return std::pow(10.0, (noise_psd_dbm_hz - 30.0) / 10.0) * bandwidth_hz;
        }
    };

    namespace detail
    {
        inline std::string_view trim(std::string_view s)
        {
            const auto first = s.find_first_not_of(" \t\r");
            if (first == std::string_view::npos)
                return {};
            const auto last = s.find_last_not_of(" \t\r");
            return s.substr(first, last - first + 1);
        }

        inline double parse_double(std::string_view key, std::string_view text)
        {
            const std::string s(text);
            if (s == "inf" || s == "+inf")
                return std::numeric_limits<double>::infinity();
            if (s == "-inf")
                return -std::numeric_limits<double>::infinity();
            std::size_t used = 0;
            double v = 0.0;
            try
            {
                v = std::stod(s, &used);
            }
            catch (const std::exception &)
            {
                used = 0;
            }
            if (used != s.size() || s.empty())
                throw std::invalid_argument("config: bad number for '" + std::string(key) + "': " + s);
            return v;
        }

        inline int parse_int(std::string_view key, std::string_view text)
        {
            int v = 0;
            const auto *end = text.data() + text.size();
            const auto res = std::from_chars(text.data(), end, v);
            if (res.ec != std::errc() || res.ptr != end)
                throw std::invalid_argument("config: bad integer for '" + std::string(key) + "': " + std::string(text));
            return v;
        }
    } // namespace detail

    // Parses flat `key = value` text. Keys are the SystemConfig field names; `#`
    // starts a comment. Absent keys keep their defaults. When num_uds or num_rrus
    // is given without uds_per_rru, the most even partition is used.
    inline SystemConfig parse_config(std::istream &in)
    {
        SystemConfig cfg;
        bool have_partition = false;
        bool counts_changed = false;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            std::string_view view(line);
            if (const auto hash = view.find('#'); hash != std::string_view::npos)
                view = view.substr(0, hash);
            view = detail::trim(view);
            if (view.empty())
                continue;
            const auto eq = view.find('=');
            if (eq == std::string_view::npos)
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
            const auto key = detail::trim(view.substr(0, eq));
            const auto value = detail::trim(view.substr(eq + 1));

            if (key == "bandwidth_hz")
                cfg.bandwidth_hz = detail::parse_double(key, value);
            else if (key == "num_uds")
                cfg.num_uds = detail::parse_int(key, value), counts_changed = true;
            else if (key == "num_rrus")
                cfg.num_rrus = detail::parse_int(key, value), counts_changed = true;
            else if (key == "uds_per_rru")
            {
                cfg.uds_per_rru.clear();
                std::string_view rest = value;
                while (!rest.empty())
                {
                    const auto comma = rest.find(',');
                    cfg.uds_per_rru.push_back(detail::parse_int(key, detail::trim(rest.substr(0, comma))));
                    if (comma == std::string_view::npos)
                        break;
                    rest = rest.substr(comma + 1);
                }
                have_partition = true;
            }
            else if (key == "rru_antennas")
                cfg.rru_antennas = detail::parse_int(key, value);
            else if (key == "bbu_antennas")
                cfg.bbu_antennas = detail::parse_int(key, value);
            else if (key == "correlation_rho")
                cfg.correlation_rho = detail::parse_double(key, value);
            else if (key == "rician_db")
                cfg.rician_db = detail::parse_double(key, value);
            else if (key == "receiver_efficiency")
                cfg.receiver_efficiency = detail::parse_double(key, value);
            else if (key == "noise_psd_dbm_hz")
                cfg.noise_psd_dbm_hz = detail::parse_double(key, value);
            else if (key == "p_ud_watts")
                cfg.p_ud_watts = detail::parse_double(key, value);
            else if (key == "p_rru_watts")
                cfg.p_rru_watts = detail::parse_double(key, value);
            else if (key == "f_access_hz")
                cfg.f_access_hz = detail::parse_double(key, value);
            else if (key == "f_fronthaul_ghz")
                cfg.f_fronthaul_ghz = detail::parse_double(key, value);
            else
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                            std::string(key) + "'");
        }
        if (!have_partition && counts_changed)
            cfg.uds_per_rru = even_partition(cfg.num_uds, cfg.num_rrus);
        if (have_partition && !counts_changed)
        {
            cfg.num_rrus = static_cast<int>(cfg.uds_per_rru.size());
            cfg.num_uds = std::accumulate(cfg.uds_per_rru.begin(), cfg.uds_per_rru.end(), 0);
        }
        cfg.validate();
        return cfg;
    }

    inline SystemConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open config file: " + path);
        return parse_config(in);
    }

    inline void write_config(std::ostream &out, const SystemConfig &cfg)
    {
        out.precision(17);
        out << "bandwidth_hz = " << cfg.bandwidth_hz << '\n'
            << "num_uds = " << cfg.num_uds << '\n'
            << "num_rrus = " << cfg.num_rrus << '\n'
            << "uds_per_rru = ";
        for (std::size_t r = 0; r < cfg.uds_per_rru.size(); ++r)
            out << (r ? "," : "") << cfg.uds_per_rru[r];
        out << '\n'
            << "rru_antennas = " << cfg.rru_antennas << '\n'
            << "bbu_antennas = " << cfg.bbu_antennas << '\n'
            << "correlation_rho = " << cfg.correlation_rho << '\n'
            << "rician_db = " << cfg.rician_db << '\n'
            << "receiver_efficiency = " << cfg.receiver_efficiency << '\n'
            << "noise_psd_dbm_hz = " << cfg.noise_psd_dbm_hz << '\n'
            << "p_ud_watts = " << cfg.p_ud_watts << '\n'
            << "p_rru_watts = " << cfg.p_rru_watts << '\n'
            << "f_access_hz = " << cfg.f_access_hz << '\n'
            << "f_fronthaul_ghz = " << cfg.f_fronthaul_ghz << '\n';
    }

    // ---------- Pathloss ----------

    // UD -> RRU link, d in meters, carrier in Hz. Returns dB.
    inline double pathloss_access(double d, double f_c)
    {
        if (!(d > 0.0) || !(f_c > 0.0))
            throw std::domain_error("pathloss_access: distance and carrier must be positive.");
        return -154.0 + 20.0 * std::log10(f_c) + 20.0 * std::log10(d);
    }

    // RRU -> BBU mmWave link, d in meters, carrier in GHz. Returns dB.
    inline double pathloss_fronthaul(double d, double f_mm_ghz)
    {
        if (!(d > 0.0) || !(f_mm_ghz > 0.0))
            throw std::domain_error("pathloss_fronthaul: distance and carrier must be positive.");
        return 3.34 + 18.62 * std::log10(f_mm_ghz) + 22.0 * std::log10(d);
    }

    // ---------- UD index map ----------

    struct UdIndex
    {
        int rru = 0;   // 0-based RRU index r
        int local = 0; // 0-based index u_r within the RRU
    };

    // Bijection k <-> (r, u_r) with k = sum_{r' < r} U_r' + u_r (0-based).
    class UdIndexMap
    {
    public:
        UdIndexMap() = default;
        explicit UdIndexMap(std::span<const int> uds_per_rru)
            : counts_(uds_per_rru.begin(), uds_per_rru.end())
        {
            offsets_.reserve(counts_.size() + 1);
            offsets_.push_back(0);
            for (int u : counts_)
            {
                if (u < 0)
                    throw std::invalid_argument("UdIndexMap: negative UD count.");
                offsets_.push_back(offsets_.back() + u);
            }
            owner_.reserve(static_cast<std::size_t>(offsets_.back()));
            for (std::size_t r = 0; r < counts_.size(); ++r)
                for (int u = 0; u < counts_[r]; ++u)
                    owner_.push_back({static_cast<int>(r), u});
        }

        int num_uds() const { return offsets_.empty() ? 0 : offsets_.back(); }
        int num_rrus() const { return static_cast<int>(counts_.size()); }
        int count(int r) const { return counts_.at(static_cast<std::size_t>(r)); }
        int offset(int r) const { return offsets_.at(static_cast<std::size_t>(r)); }

        UdIndex locate(int k) const { return owner_.at(static_cast<std::size_t>(k)); }
        int rru_of(int k) const { return locate(k).rru; }

        int global(int r, int u) const
        {
            if (u < 0 || u >= count(r))
                throw std::out_of_range("UdIndexMap: local index out of range.");
            return offset(r) + u;
        }

        bool same_rru(int j, int k) const { return rru_of(j) == rru_of(k); }

    private:
        std::vector<int> counts_;
        std::vector<int> offsets_;
        std::vector<UdIndex> owner_;
    };

    // ---------- Topology ----------

    struct Area
    {
        double x0, x1, y0, y1;
    };

    struct Topology
    {
        Point bbu{};
        std::vector<Point> rrus;
        std::vector<Area> rru_areas;
        std::vector<Point> uds;
        UdIndexMap index;

        // BBU-centric azimuth of the RRU hosting stream k
        double stream_azimuth(int k) const
        {
            const Point &p = rrus.at(static_cast<std::size_t>(index.rru_of(k)));
            return std::atan2(p.y - bbu.y, p.x - bbu.x);
        }
    };

    namespace detail
    {
        // Grid of equal cells covering the square; R = 4 gives the quadrants.
        inline std::pair<int, int> grid_shape(int num_rrus)
        {
            int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_rrus))));
            while (num_rrus % cols != 0)
                ++cols;
            return {cols, num_rrus / cols};
        }
    } // namespace detail

    // BBU at the origin. For R = 4 the RRUs sit at the quadrant centers in the
    // order (+,+), (+,-), (-,-), (-,+); other R use a cols x rows grid of equal
    // cells. Each RRU's U_r UDs are uniform inside its own cell, at least 1 m away.
    inline Topology place_topology(const SystemConfig &cfg, std::uint64_t seed)
    {
        cfg.validate();
        const double a = coverage_half_width;
        Topology topo;
        topo.index = UdIndexMap(cfg.uds_per_rru);

        if (cfg.num_rrus == 4)
        {
            const double h = a / 2.0;
            topo.rrus = {{h, h}, {h, -h}, {-h, -h}, {-h, h}};
            topo.rru_areas = {{0, a, 0, a}, {0, a, -a, 0}, {-a, 0, -a, 0}, {-a, 0, 0, a}};
        }
        else
        {
            const auto [cols, rows] = detail::grid_shape(cfg.num_rrus);
            const double w = 2.0 * a / cols;
            const double h = 2.0 * a / rows;
            for (int r = 0; r < cfg.num_rrus; ++r)
            {
                const int ci = r % cols;
                const int ri = r / cols;
                Area cell{-a + ci * w, -a + (ci + 1) * w, -a + ri * h, -a + (ri + 1) * h};
                Point center{0.5 * (cell.x0 + cell.x1), 0.5 * (cell.y0 + cell.y1)};
                if (distance(center, topo.bbu) < 1.0)
                    center = {0.5 * (center.x + cell.x1), 0.5 * (center.y + cell.y1)};
                topo.rrus.push_back(center);
                topo.rru_areas.push_back(cell);
            }
        }

        Rng rng = make_rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int r = 0; r < cfg.num_rrus; ++r)
        {
            const Area &cell = topo.rru_areas[static_cast<std::size_t>(r)];
            const Point &rru = topo.rrus[static_cast<std::size_t>(r)];
            for (int u = 0; u < cfg.uds_per_rru[static_cast<std::size_t>(r)]; ++u)
            {
                Point p;
                do
                {
                    p.x = cell.x0 + unit(rng) * (cell.x1 - cell.x0);
                    p.y = cell.y0 + unit(rng) * (cell.y1 - cell.y0);
                } while (distance(p, rru) < 1.0);
                topo.uds.push_back(p);
            }
        }
        return topo;
    }

    inline void check_consistent(const SystemConfig &cfg, const Topology &topo)
    {
        if (static_cast<int>(topo.rrus.size()) != cfg.num_rrus || static_cast<int>(topo.uds.size()) != cfg.num_uds ||
            topo.index.num_uds() != cfg.num_uds || topo.index.num_rrus() != cfg.num_rrus)
            throw std::invalid_argument("topology does not match the system configuration.");
        for (int r = 0; r < cfg.num_rrus; ++r)
            if (topo.index.count(r) != cfg.uds_per_rru[static_cast<std::size_t>(r)])
                throw std::invalid_argument("topology UD partition does not match uds_per_rru.");
    }

    // ---------- Power sharing ----------

    // Guard keeping every factor away from {0, 1}
    inline constexpr double default_guard = 1e-3;

    // The 2K decision variables: pilot fractions of the UD powers (access) and of
    // the forwarding TA powers (fronthaul). Flattened order is
    // [access_1..access_K, fronthaul_1..fronthaul_K].
    struct PowerSharingVector
    {
        std::vector<double> access;
        std::vector<double> fronthaul;

        static PowerSharingVector uniform(int num_uds, double value)
        {
            return {std::vector<double>(static_cast<std::size_t>(num_uds), value),
                    std::vector<double>(static_cast<std::size_t>(num_uds), value)};
        }

        static PowerSharingVector from_flat(std::span<const double> genes)
        {
            if (genes.size() % 2 != 0)
                throw std::invalid_argument("PowerSharingVector: flat vector must have even length.");
            const auto k = genes.size() / 2;
            return {std::vector<double>(genes.begin(), genes.begin() + static_cast<std::ptrdiff_t>(k)),
                    std::vector<double>(genes.begin() + static_cast<std::ptrdiff_t>(k), genes.end())};
        }

        std::vector<double> flat() const
        {
            std::vector<double> out(access);
            out.insert(out.end(), fronthaul.begin(), fronthaul.end());
            return out;
        }

        int num_uds() const { return static_cast<int>(access.size()); }

        PowerSharingVector clamped(double guard = default_guard) const
        {
            PowerSharingVector out = *this;
            for (auto *v : {&out.access, &out.fronthaul})
                for (double &x : *v)
                    x = std::clamp(x, guard, 1.0 - guard);
            return out;
        }

        bool within_guard(double guard = default_guard) const
        {
            for (const auto *v : {&access, &fronthaul})
                for (double x : *v)
                    if (!(x >= guard && x <= 1.0 - guard))
                        return false;
            return true;
        }
    };

    // ---------- Link budget ----------

    struct LinkBudget
    {
        std::vector<double> p_tx_pilot; // per UD, W
        std::vector<double> p_tx_data;  // per UD, W
        std::vector<double> p_sp;       // per RRU, W
        std::vector<double> p_ta_pilot; // per forwarding TA (stream), W
        std::vector<double> p_ta_data;  // per forwarding TA (stream), W

        // Received UD powers at every RRU: (r, j) is UD j as seen at RRU r.
        // Serving entries (r = r(j)) form the P_rx,r^(u,x) diagonals, the rest the
        // cross-RRU diagonals P_rx,r/r'^(u,x).
        RMatrix rx_access_pilot;
        RMatrix rx_access_data;

        std::vector<double> rx_fronthaul_pilot; // P_rx^(r,p) per stream at the BBU
        std::vector<double> rx_fronthaul_data;  // P_rx^(r,d) per stream at the BBU

        double noise_access = 0.0;    // sigma~^2
        double noise_fronthaul = 0.0; // sigma(breve)^2

        UdIndexMap index;

        double serving_pilot(int k) const { return rx_access_pilot(index.rru_of(k), k); }
        double serving_data(int k) const { return rx_access_data(index.rru_of(k), k); }

        // Sum of cross-RRU data receive powers at the RRU hosting stream k
        double cross_rru_data(int k) const
        {
            const int r = index.rru_of(k);
            double sum = 0.0;
            for (int j = 0; j < index.num_uds(); ++j)
                if (index.rru_of(j) != r)
                    sum += rx_access_data(r, j);
            return sum;
        }
    };

    inline LinkBudget build_link_budget(const SystemConfig &cfg, const Topology &topo, const PowerSharingVector &eta)
    {
        cfg.validate();
        check_consistent(cfg, topo);
        const int K = cfg.num_uds;
        const int R = cfg.num_rrus;
        if (eta.num_uds() != K || static_cast<int>(eta.fronthaul.size()) != K)
            throw std::invalid_argument("build_link_budget: power sharing vector must have K entries per layer.");
        for (const auto *v : {&eta.access, &eta.fronthaul})
            for (double x : *v)
                if (!(x > 0.0 && x < 1.0))
                    throw std::domain_error("build_link_budget: power sharing factors must lie in (0, 1).");

        LinkBudget lb;
        lb.index = topo.index;
        const auto k_size = static_cast<std::size_t>(K);
        lb.p_tx_pilot.resize(k_size);
        lb.p_tx_data.resize(k_size);
        lb.p_ta_pilot.resize(k_size);
        lb.p_ta_data.resize(k_size);
        lb.rx_fronthaul_pilot.resize(k_size);
        lb.rx_fronthaul_data.resize(k_size);
        lb.p_sp.resize(static_cast<std::size_t>(R));

        for (int r = 0; r < R; ++r)
        {
            const int u = cfg.uds_per_rru[static_cast<std::size_t>(r)];
            const double p_sp = cfg.receiver_efficiency * u * cfg.p_ud_watts;
            if (p_sp >= cfg.p_rru_watts)
                throw InfeasibleBudgetError("RRU " + std::to_string(r + 1) +
                                            ": signal processing power exhausts the RRU budget.");
            lb.p_sp[static_cast<std::size_t>(r)] = p_sp;
        }

        for (int k = 0; k < K; ++k)
        {
            const auto kk = static_cast<std::size_t>(k);
            const int r = topo.index.rru_of(k);
            const int u = cfg.uds_per_rru[static_cast<std::size_t>(r)];
            lb.p_tx_pilot[kk] = eta.access[kk] * cfg.p_ud_watts;
            lb.p_tx_data[kk] = (1.0 - eta.access[kk]) * cfg.p_ud_watts;
            const double per_ta = (cfg.p_rru_watts - lb.p_sp[static_cast<std::size_t>(r)]) / u;
            lb.p_ta_pilot[kk] = eta.fronthaul[kk] * per_ta;
            lb.p_ta_data[kk] = (1.0 - eta.fronthaul[kk]) * per_ta;

            const Point &rru = topo.rrus[static_cast<std::size_t>(r)];
            const double gain = db_to_linear(-pathloss_fronthaul(distance(rru, topo.bbu), cfg.f_fronthaul_ghz));
            lb.rx_fronthaul_pilot[kk] = lb.p_ta_pilot[kk] * gain;
            lb.rx_fronthaul_data[kk] = lb.p_ta_data[kk] * gain;
        }

        lb.rx_access_pilot.resize(R, K);
        lb.rx_access_data.resize(R, K);
        for (int r = 0; r < R; ++r)
            for (int j = 0; j < K; ++j)
            {
                const double d = distance(topo.rrus[static_cast<std::size_t>(r)], topo.uds[static_cast<std::size_t>(j)]);
                const double gain = db_to_linear(-pathloss_access(d, cfg.f_access_hz));
                lb.rx_access_pilot(r, j) = lb.p_tx_pilot[static_cast<std::size_t>(j)] * gain;
                lb.rx_access_data(r, j) = lb.p_tx_data[static_cast<std::size_t>(j)] * gain;
            }

        lb.noise_access = cfg.noise_variance();
        lb.noise_fronthaul = cfg.noise_variance();
        return lb;
    }

} // namespace cran
