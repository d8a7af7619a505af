/*
 * Copyright (C) 2026 the platoon-lab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not
 * use this file except in compliance with the License. You may obtain a copy of
 * the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
 * License for the specific language governing permissions and limitations under
 * the License.
 */

#include "platoon/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "platoon/design.hpp"
#include "platoon/errors.hpp"
#include "platoon/freqdomain.hpp"
#include "platoon/model.hpp"
#include "platoon/sim.hpp"
#include "platoon/topology.hpp"

namespace platoon::cli {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidParameter(path + ":" + std::to_string(lineno) +
                                   ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw InvalidParameter(path + ":" + std::to_string(lineno) +
                                   ": empty key");
        if (!kv.emplace(key, value).second)
            throw InvalidParameter(path + ": duplicate key '" + key + "'");
    }
    return kv;
}

class ConfigReader {
  public:
    explicit ConfigReader(const std::string& path)
        : path_(path), kv_(parse_kv_file(path)) {}

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    double get_double(const std::string& key) {
        const auto it = kv_.find(key);
        if (it == kv_.end())
            throw InvalidParameter(path_ + ": missing required key '" + key + "'");
        used_.insert(key);
        return parse_double(key, it->second);
    }

    double get_double(const std::string& key, double fallback) {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        used_.insert(key);
        return parse_double(key, it->second);
    }

    int get_int(const std::string& key) {
        const auto it = kv_.find(key);
        if (it == kv_.end())
            throw InvalidParameter(path_ + ": missing required key '" + key + "'");
        used_.insert(key);
        return parse_int(key, it->second);
    }

    int get_int(const std::string& key, int fallback) {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        used_.insert(key);
        return parse_int(key, it->second);
    }

    void finish() const {
        for (const auto& [key, value] : kv_)
            if (!used_.count(key))
                throw InvalidParameter(path_ + ": unknown key '" + key + "'");
    }

  private:
    double parse_double(const std::string& key, const std::string& raw) const {
        double v = 0.0;
        const char* first = raw.data();
        const char* last = raw.data() + raw.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last)
            throw InvalidParameter(path_ + ": key '" + key +
                                   "' is not a number: '" + raw + "'");
        return v;
    }

    int parse_int(const std::string& key, const std::string& raw) const {
        int v = 0;
        const char* first = raw.data();
        const char* last = raw.data() + raw.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last)
            throw InvalidParameter(path_ + ": key '" + key +
                                   "' is not an integer: '" + raw + "'");
        return v;
    }

    std::string path_;
    std::map<std::string, std::string> kv_;
    std::set<std::string> used_;
};

std::ofstream open_out(const std::string& out_dir, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const std::string path = out_dir + "/" + name;
    std::ofstream os(path);
    if (!os) throw InvalidParameter("cannot open output file: " + path);
    return os;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_w_report(std::ostream& os, const WCoefficients& w,
                    const WConditionReport& rep) {
    os << "n1..n6: " << fmt(w.n1) << " " << fmt(w.n2) << " " << fmt(w.n3) << " "
       << fmt(w.n4) << " " << fmt(w.n5) << " " << fmt(w.n6) << "\n";
    os << "d0..d4: " << fmt(w.d0) << " " << fmt(w.d1) << " " << fmt(w.d2) << " "
       << fmt(w.d3) << " " << fmt(w.d4) << "\n";
    os << "W2=" << fmt(w.w2) << " W4=" << fmt(w.w4) << " W6=" << fmt(w.w6)
       << " W8=" << fmt(w.w8) << " W10=" << fmt(w.w10) << "\n";
    if (w.omega0)
        os << "omega0: " << fmt(*w.omega0) << " rad/s\n";
    else
        os << "omega0: n/a\n";
    os << "W-conditions at omega0_required=" << fmt(rep.omega0_required)
       << ": W2 " << (rep.w2_ok ? "ok" : "violated") << ", W4 "
       << (rep.w4_ok ? "ok" : "violated") << ", W6 "
       << (rep.w6_ok ? "ok" : "violated") << ", tail "
       << (rep.tail_ok ? "ok" : "violated") << " -> "
       << (rep.all_ok ? "sufficient" : "inconclusive") << "\n";
}

void write_internal_stability(std::ostream& os, const InternalStabilityReport& rep) {
    os << "feedback loop: " << (rep.feedback_ok ? "stable" : "unstable") << "\n";
    for (const auto& c : rep.consensus_checks)
        os << "consensus cubic l=" << fmt(c.l_ii) << ": a2=" << fmt(c.a2)
           << " a1=" << fmt(c.a1) << " a0=" << fmt(c.a0) << " -> "
           << (c.stable ? "stable" : "unstable") << "\n";
    os << "internally stable: " << (rep.stable ? "yes" : "no") << "\n";
}

int worker_count(int rows) {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("PLATOON_LAB_THREADS")) {
        int cap = 0;
        const char* last = env + std::strlen(env);
        const auto [ptr, ec] = std::from_chars(env, last, cap);
        if (ec == std::errc{} && ptr == last && cap >= 1)
            n = static_cast<unsigned>(cap);
    }
    return static_cast<int>(std::min<unsigned>(n, static_cast<unsigned>(rows)));
}

}  // namespace

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 bool allow_unstable) {
    try {
        ConfigReader rd(config_path);
        PlatoonConfig cfg;
        cfg.n = rd.get_int("n");
        cfg.r = rd.get_int("r");
        cfg.tau = rd.get_double("tau");
        cfg.h = rd.get_double("h");
        const double b = rd.get_double("b");
        const double alpha = rd.get_double("alpha");
        const double d = rd.get_double("d", 5.0);
        cfg.init_spacing = d;
        cfg.standstill_gap = rd.get_double("standstill_gap", d);
        cfg.v0 = rd.get_double("v0", 20.0);
        cfg.disturbance.amplitude = rd.get_double("dist_amplitude", 10.0);
        cfg.disturbance.angular_frequency = rd.get_double("dist_omega", 1.0);
        cfg.disturbance.start_time = rd.get_double("dist_start", 60.0);

        Scenario sc;
        sc.t_end = rd.get_double("t_end", 120.0);
        sc.dt = rd.get_double("dt", 1e-3);
        sc.record_stride = rd.get_int("record_stride", 10);
        const double epsilon = rd.get_double("epsilon", 0.01);
        const double delta_rel = rd.get_double("delta_rel", 1e-3);
        rd.finish();

        sc.config = cfg;
        sc.gains = gains_from_b(b, alpha, cfg.tau);
        sc.topology = build_mpf(cfg.n, cfg.r);
        sc.validate();

        const InternalStabilityReport stab =
            is_internally_stable(sc.gains, sc.topology, cfg.tau);
        if (!stab.stable && !allow_unstable) {
            std::fprintf(stderr,
                         "error: gains fail the internal stability check "
                         "(rerun with --allow-unstable to force)\n");
            return kExitInput;
        }

        SimTrace trace;
        try {
            trace = integrate(sc);
        } catch (const DivergenceError& e) {
            auto rep = open_out(out_dir, "report.txt");
            rep << "diverged: yes\nfirst_bad_time: " << fmt(e.first_bad_time)
                << "\n";
            std::fprintf(stderr, "error: %s at t=%s\n", e.what(),
                         fmt(e.first_bad_time).c_str());
            return kExitDiverged;
        }

        std::pair<double, double> window{sc.t_end, sc.t_end};
        if (cfg.disturbance.amplitude != 0.0)
            window = {cfg.disturbance.start_time,
                      cfg.disturbance.start_time + cfg.disturbance.duration()};
        const StabilityReport rep = stability_report(trace, epsilon, window, delta_rel);

        {
            auto os = open_out(out_dir, "trace.csv");
            write_trace_csv(trace, os);
        }
        auto os = open_out(out_dir, "report.txt");
        os << "vehicles: " << cfg.n << "\n";
        os << "diverged: no\n";
        os << "converged: " << (rep.converged ? "yes" : "no") << "\n";
        os << "string_stable_empirical: "
           << (rep.string_stable_empirical ? "yes" : "no") << "\n";
        os << "epsilon: " << fmt(rep.epsilon) << "\n";
        os << "delta_rel: " << fmt(rep.delta_rel) << "\n";
        os << "settle_window: [" << fmt(rep.settle_window.first) << ", "
           << fmt(rep.settle_window.second) << ")\n";
        os << "peak_window: [" << fmt(rep.peak_window.first) << ", "
           << fmt(rep.peak_window.second) << "]\n";
        os << "settle_times:";
        for (double t : rep.settle_times) os << " " << fmt(t);
        os << "\npeak_errors:";
        for (double p : rep.peak_errors) os << " " << fmt(p);
        os << "\n";
        if (rep.converged) {
            os << "convergence_order:";
            for (int i : convergence_order(rep)) os << " " << i;
            os << "\n";
        }
        write_internal_stability(os, stab);

        // without a disturbance there is no amplification to measure, so the
        // exit status gates on convergence alone
        const bool stable_ok =
            cfg.disturbance.amplitude == 0.0 || rep.string_stable_empirical;
        return rep.converged && stable_ok ? kExitOk : kExitPropertyFailed;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
}

int cmd_analyze(const std::string& config_path, const std::string& out_dir) {
    try {
        ConfigReader rd(config_path);
        const int n = rd.get_int("n");
        const int r = rd.get_int("r");
        const double tau = rd.get_double("tau");
        const double h = rd.get_double("h");
        const double b = rd.get_double("b");
        const double alpha = rd.get_double("alpha");
        GridSpec grid;
        grid.omega_min = rd.get_double("omega_min", grid.omega_min);
        grid.omega_max = rd.get_double("omega_max", grid.omega_max);
        grid.points_per_decade = rd.get_int("points_per_decade", grid.points_per_decade);
        const bool own_omega0 = !rd.has("omega0");
        const double omega0_required = rd.get_double("omega0", 0.0);
        rd.finish();

        const Gains g = gains_from_b(b, alpha, tau);
        const Topology topo = build_mpf(n, r);
        const TransferPolys tp = build_polys(g, r, h, tau);
        const FrequencyResponse fr = hinf_norm(tp, grid);
        const WCoefficients w = w_coefficients(g, r, h, tau);
        const WConditionReport wrep = check_w_conditions(
            w, own_omega0 ? w.omega0.value_or(0.0) : omega0_required);
        const InternalStabilityReport stab = is_internally_stable(g, topo, tau);

        {
            auto os = open_out(out_dir, "bode.csv");
            write_bode_csv(fr, os);
        }
        auto os = open_out(out_dir, "analysis.txt");
        os << "b: " << fmt(b) << "\nalpha: " << fmt(alpha) << "\nh: " << fmt(h)
           << "\ntau: " << fmt(tau) << "\nr: " << r << "\n";
        os << "k1: " << fmt(g.k1) << "\nk2: " << fmt(g.k2) << "\nk3: " << fmt(g.k3)
           << "\n";
        os << "hinf: " << fmt(fr.hinf) << "\n";
        os << "argmax_omega: " << fmt(fr.argmax_omega) << "\n";
        os << "string_stable: " << (fr.hinf <= 1.0 + kHinfSlack ? "yes" : "no")
           << "\n";
        write_w_report(os, w, wrep);
        write_internal_stability(os, stab);

        const bool ok = fr.hinf <= 1.0 + kHinfSlack && stab.stable;
        return ok ? kExitOk : kExitPropertyFailed;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
}

namespace {

void write_design_report(std::ostream& os, const DesignResult& res,
                         const DesignSpec& spec) {
    os << "feasible: " << (res.feasible ? "yes" : "no") << "\n";
    os << "alpha: " << fmt(res.alpha) << "\n";
    os << "b: " << fmt(res.b) << "\n";
    os << "h: " << fmt(res.h) << "\n";
    os << "k_max: " << spec.k_max << "\n";
    os << "tol: " << fmt(spec.tol) << "\n";
    os << "certified_band: [0, " << fmt(spec.omega1) << "] rad/s\n";
    if (res.feasible) {
        os << "hinf: " << fmt(res.verification.hinf) << "\n";
        os << "argmax_omega: " << fmt(res.verification.argmax_omega) << "\n";
    }
    os << "headways_tried:";
    for (double h : res.bisection_trace) os << " " << fmt(h);
    os << "\n";
    if (res.has_w_advisory) write_w_report(os, res.w_advisory, res.w_report);
}

}  // namespace

int cmd_design(const std::string& config_path, const std::string& out_dir) {
    try {
        ConfigReader rd(config_path);
        const double h = rd.get_double("h");
        const int r = rd.get_int("r");
        DesignSpec spec;
        spec.tau = rd.get_double("tau");
        spec.r_bar = r;
        spec.h_bar = h;
        spec.omega0 = rd.get_double("omega0", spec.omega0);
        spec.omega1 = rd.get_double("omega1", spec.omega1);
        spec.k_max = rd.get_int("k_max", spec.k_max);
        spec.tol = rd.get_double("tol", spec.tol);
        rd.finish();

        const DesignResult res = heuristic_search(h, r, spec.tau, spec);
        auto os = open_out(out_dir, "design.txt");
        write_design_report(os, res, spec);
        return res.feasible ? kExitOk : kExitPropertyFailed;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
}

int cmd_min_headway(const std::string& config_path, const std::string& out_dir) {
    try {
        ConfigReader rd(config_path);
        DesignSpec spec;
        spec.r_bar = rd.get_int("r_bar");
        spec.h_bar = rd.get_double("h_bar");
        spec.tau = rd.get_double("tau");
        spec.omega0 = rd.get_double("omega0", spec.omega0);
        spec.omega1 = rd.get_double("omega1", spec.omega1);
        spec.k_max = rd.get_int("k_max", spec.k_max);
        spec.tol = rd.get_double("tol", spec.tol);
        spec.max_rounds = rd.get_int("max_rounds", spec.max_rounds);
        rd.finish();

        const DesignResult res = minimize_headway(spec);
        {
            auto os = open_out(out_dir, "design_trace.csv");
            write_design_trace_csv(res, os);
        }
        auto os = open_out(out_dir, "design.txt");
        write_design_report(os, res, spec);
        return res.feasible ? kExitOk : kExitPropertyFailed;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
}

int cmd_region(const std::string& config_path, const std::string& out_dir) {
    try {
        ConfigReader rd(config_path);
        const int r = rd.get_int("r");
        const double tau = rd.get_double("tau");
        const double h = rd.get_double("h");
        const double alpha_min = rd.get_double("alpha_min", 0.1);
        const double alpha_max = rd.get_double("alpha_max", 2.0);
        const int alpha_steps = rd.get_int("alpha_steps", 20);
        const double b_min = rd.get_double("b_min", 1.0);
        const double b_max = rd.get_double("b_max", 15.0);
        const int b_steps = rd.get_int("b_steps", 29);
        rd.finish();
        if (alpha_steps < 1 || b_steps < 1)
            throw InvalidParameter("region: step counts must be >= 1");
        if (!(alpha_min > 0.0) || !(alpha_max > alpha_min))
            throw InvalidParameter("region: need 0 < alpha_min < alpha_max");
        if (!(b_min > 0.0) || !(b_max > b_min))
            throw InvalidParameter("region: need 0 < b_min < b_max");

        const int rows = alpha_steps + 1;
        const int cols = b_steps + 1;
        struct Cell {
            double hinf;
            bool feasible;
        };
        std::vector<Cell> cells(static_cast<std::size_t>(rows) * cols);
        const GridSpec grid;

        auto eval_row = [&](int i) {
            const double alpha = alpha_min + i * (alpha_max - alpha_min) / alpha_steps;
            for (int j = 0; j < cols; ++j) {
                const double b = b_min + j * (b_max - b_min) / b_steps;
                Cell& cell = cells[static_cast<std::size_t>(i) * cols + j];
                if (b <= 1.0 / (3.0 * tau)) {
                    cell = {std::numeric_limits<double>::quiet_NaN(), false};
                    continue;
                }
                const Gains g = gains_from_b(b, alpha, tau);
                const FrequencyResponse fr = hinf_norm(build_polys(g, r, h, tau), grid);
                cell = {fr.hinf, fr.hinf <= 1.0 + kHinfSlack};
            }
        };

        const int workers = worker_count(rows);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int i = w; i < rows; i += workers) eval_row(i);
            });
        for (auto& t : pool) t.join();

        auto os = open_out(out_dir, "region.csv");
        os << "alpha,b,hinf,feasible\n";
        char buf[128];
        bool any = false;
        for (int i = 0; i < rows; ++i) {
            const double alpha = alpha_min + i * (alpha_max - alpha_min) / alpha_steps;
            for (int j = 0; j < cols; ++j) {
                const double b = b_min + j * (b_max - b_min) / b_steps;
                const Cell& cell = cells[static_cast<std::size_t>(i) * cols + j];
                any = any || cell.feasible;
                std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%d\n", alpha, b,
                              cell.hinf, cell.feasible ? 1 : 0);
                os << buf;
            }
        }
        return any ? kExitOk : kExitPropertyFailed;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
}

}  // namespace platoon::cli
