#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "maee/baselines.hpp"
#include "maee/config.hpp"

namespace maee {

struct ResultRow {
    double sweep_value = 0.0;
    std::string scheme;
    double ee_mean = 0.0;
    double ee_std = 0.0;
    double rate_mean = 0.0;
    double e_motor_mean = 0.0;
    double tau_mean = 0.0;
    int failures = 0;
};

inline bool operator==(const ResultRow& a, const ResultRow& b) {
    return a.sweep_value == b.sweep_value && a.scheme == b.scheme && a.ee_mean == b.ee_mean &&
           a.ee_std == b.ee_std && a.rate_mean == b.rate_mean &&
           a.e_motor_mean == b.e_motor_mean && a.tau_mean == b.tau_mean &&
           a.failures == b.failures;
}

/// One (sweep point, scheme, realization) outcome, kept so aggregates can be
/// recomputed and paired per-realization comparisons made.
struct RealizationRecord {
    std::size_t sweep_index = 0;
    std::size_t scheme_index = 0;
    int realization = 0;
    std::uint64_t seed = 0;
    double ee = 0.0;
    double rate = 0.0;
    double e_motor = 0.0;
    double tau = 0.0;
    bool failed = false;
};

namespace detail {

// Fixed-width dispatch over task indices; every task writes only its own
// slot, so results are identical for any thread count.
template <class F>
inline void parallel_for(std::size_t count, int threads, F&& body) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    };
    std::vector<std::thread> pool;
    const int n = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

inline std::string format_sig9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace detail

/// Runs every scheme on identical channel realizations at each sweep point
/// (seed_i = hash(master, sweep_index, i)) and aggregates means/stds. The
/// optional record sink receives one entry per (sweep, scheme, realization).
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                             std::vector<RealizationRecord>* records_out = nullptr) {
    validate(cfg);
    const std::size_t n_sweep = cfg.sweep_values.size();
    const std::size_t n_schemes = cfg.schemes.size();
    const std::size_t n_real = static_cast<std::size_t>(cfg.realizations);
    std::vector<RealizationRecord> rec(n_sweep * n_real * n_schemes);

    struct SweepContext {
        Scenario s;
        CandidateGrid grid;
        std::vector<double> cpv;
    };
    std::vector<SweepContext> ctx(n_sweep);
    for (std::size_t si = 0; si < n_sweep; ++si) {
        ctx[si].s = apply_sweep(cfg.scenario, cfg.axis, cfg.sweep_values[si]);
        ctx[si].grid = candidate_grid(ctx[si].s, cfg.grid_step_multiplier * cfg.motor.step_size());
        ctx[si].cpv = initial_cpv(ctx[si].s, ctx[si].grid);
    }

    detail::parallel_for(n_sweep * n_real, cfg.threads, [&](std::size_t task) {
        const std::size_t si = task / n_real;
        const std::size_t ri = task % n_real;
        const SweepContext& c = ctx[si];
        const std::uint64_t seed = derive_seed(cfg.master_seed, si, ri);
        const ChannelRealization real = sample_channel(c.s, seed);
        for (std::size_t ki = 0; ki < n_schemes; ++ki) {
            RealizationRecord& r = rec[(task * n_schemes) + ki];
            r.sweep_index = si;
            r.scheme_index = ki;
            r.realization = static_cast<int>(ri);
            r.seed = seed;
            try {
                const Solution sol = solve_scheme(cfg.schemes[ki], c.s, cfg.motor, real, c.grid, c.cpv);
                r.ee = sol.breakdown.ee;
                r.rate = sol.breakdown.sum_rate;
                r.e_motor = sol.breakdown.e_motor;
                r.tau = sol.breakdown.tau;
                r.failed = !sol.converged;
            } catch (const std::exception&) {
                r.failed = true;
            }
        }
    });

    std::vector<ResultRow> rows;
    rows.reserve(n_sweep * n_schemes);
    for (std::size_t si = 0; si < n_sweep; ++si) {
        for (std::size_t ki = 0; ki < n_schemes; ++ki) {
            ResultRow row;
            row.sweep_value = cfg.sweep_values[si];
            row.scheme = to_string(cfg.schemes[ki]);
            double sum = 0.0, sum_rate_v = 0.0, sum_motor = 0.0, sum_tau = 0.0;
            for (std::size_t ri = 0; ri < n_real; ++ri) {
                const RealizationRecord& r = rec[(si * n_real + ri) * n_schemes + ki];
                sum += r.ee;
                sum_rate_v += r.rate;
                sum_motor += r.e_motor;
                sum_tau += r.tau;
                row.failures += r.failed ? 1 : 0;
            }
            const double n = static_cast<double>(n_real);
            row.ee_mean = sum / n;
            row.rate_mean = sum_rate_v / n;
            row.e_motor_mean = sum_motor / n;
            row.tau_mean = sum_tau / n;
            double ss = 0.0;
            for (std::size_t ri = 0; ri < n_real; ++ri) {
                const double d = rec[(si * n_real + ri) * n_schemes + ki].ee - row.ee_mean;
                ss += d * d;
            }
            row.ee_std = n_real > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            rows.push_back(std::move(row));
        }
    }
    if (records_out) *records_out = std::move(rec);
    return rows;
}

inline const char* result_csv_header() {
    return "sweep_value,scheme,ee_mean,ee_std,rate_mean,e_motor_mean,tau_mean,failures";
}

inline std::string results_to_csv(const std::vector<ResultRow>& rows) {
    std::string out = result_csv_header();
    out += '\n';
    for (const ResultRow& r : rows) {
        out += detail::format_sig9(r.sweep_value);
        out += ',';
        out += r.scheme;
        out += ',';
        out += detail::format_sig9(r.ee_mean);
        out += ',';
        out += detail::format_sig9(r.ee_std);
        out += ',';
        out += detail::format_sig9(r.rate_mean);
        out += ',';
        out += detail::format_sig9(r.e_motor_mean);
        out += ',';
        out += detail::format_sig9(r.tau_mean);
        out += ',';
        out += std::to_string(r.failures);
        out += '\n';
    }
    return out;
}

inline std::vector<ResultRow> results_from_csv(const std::string& csv) {
    std::stringstream ss(csv);
    std::string line;
    if (!std::getline(ss, line) || line != result_csv_header())
        throw std::invalid_argument("results_from_csv: bad header");
    std::vector<ResultRow> rows;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ls, tok, ',')) cols.push_back(tok);
        if (cols.size() != 8) throw std::invalid_argument("results_from_csv: bad row: " + line);
        ResultRow r;
        r.sweep_value = std::stod(cols[0]);
        r.scheme = cols[1];
        r.ee_mean = std::stod(cols[2]);
        r.ee_std = std::stod(cols[3]);
        r.rate_mean = std::stod(cols[4]);
        r.e_motor_mean = std::stod(cols[5]);
        r.tau_mean = std::stod(cols[6]);
        r.failures = std::stoi(cols[7]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void to_json(nlohmann::json& j, const ResultRow& r) {
    j = nlohmann::json{{"sweep_value", r.sweep_value}, {"scheme", r.scheme},
                       {"ee_mean", r.ee_mean},         {"ee_std", r.ee_std},
                       {"rate_mean", r.rate_mean},     {"e_motor_mean", r.e_motor_mean},
                       {"tau_mean", r.tau_mean},       {"failures", r.failures}};
}

inline void from_json(const nlohmann::json& j, ResultRow& r) {
    j.at("sweep_value").get_to(r.sweep_value);
    j.at("scheme").get_to(r.scheme);
    j.at("ee_mean").get_to(r.ee_mean);
    j.at("ee_std").get_to(r.ee_std);
    j.at("rate_mean").get_to(r.rate_mean);
    j.at("e_motor_mean").get_to(r.e_motor_mean);
    j.at("tau_mean").get_to(r.tau_mean);
    j.at("failures").get_to(r.failures);
}

inline void emit_results(const std::vector<ResultRow>& rows, const std::string& format,
                         const std::string& path) {
    if (format != "csv" && format != "json")
        throw std::invalid_argument("emit_results: format must be csv or json");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_results: cannot open " + path);
    if (format == "csv") {
        out << results_to_csv(rows);
    } else {
        out << nlohmann::json(rows).dump(2) << '\n';
    }
    if (!out.good()) throw std::runtime_error("emit_results: write failed for " + path);
}

/// Preset sweep configurations mirroring the evaluation figures. `desk`
/// scale trades realization count and grid resolution for turnaround.
inline ExperimentConfig figure_config(const std::string& name, const std::string& scale,
                                      std::uint64_t seed = 1) {
    if (scale != "desk" && scale != "full")
        throw std::invalid_argument("figure_config: scale must be desk or full");
    ExperimentConfig cfg;
    cfg.master_seed = seed;
    cfg.realizations = scale == "desk" ? 100 : 1000;
    cfg.grid_step_multiplier = scale == "desk" ? 2.0 : 1.0;
    Scenario& s = cfg.scenario;

    const std::vector<Scheme> su_schemes{Scheme::Proposed, Scheme::PSO, Scheme::FPA,
                                         Scheme::ConvEE, Scheme::SM};
    const std::vector<Scheme> mu_schemes{Scheme::Proposed, Scheme::FPA, Scheme::ConvEE,
                                         Scheme::SM};
    if (name == "fig5") {
        s.num_users = 1;
        cfg.schemes = su_schemes;
        cfg.axis = SweepAxis::ArrayLengthOverLambda;
        cfg.sweep_values = {3, 4, 5, 6, 7, 8};
    } else if (name == "fig6") {
        s.num_users = 1;
        cfg.schemes = {Scheme::Proposed, Scheme::FPA};
        cfg.axis = SweepAxis::ArrayLengthOverLambda;
        cfg.sweep_values = {6};
    } else if (name == "fig7") {
        s.num_users = 1;
        cfg.schemes = su_schemes;
        cfg.axis = SweepAxis::NumPaths;
        cfg.sweep_values = {2, 6, 10, 14, 18};
    } else if (name == "fig8") {
        s.num_users = 1;
        cfg.schemes = su_schemes;
        cfg.axis = SweepAxis::CoherenceTime;
        cfg.sweep_values = {0.05, 0.1, 0.15, 0.2, 0.25};
    } else if (name == "fig9") {
        s.num_users = 1;
        cfg.schemes = su_schemes;
        cfg.axis = SweepAxis::NumAntennas;
        cfg.sweep_values = {2, 4, 6, 8, 10, 12};
    } else if (name == "fig10") {
        cfg.schemes = mu_schemes;
        cfg.schemes.push_back(Scheme::ZF);
        cfg.axis = SweepAxis::ArrayLengthOverLambda;
        cfg.sweep_values = {3, 4, 5, 6, 7, 8};
    } else if (name == "fig11") {
        cfg.schemes = mu_schemes;
        cfg.axis = SweepAxis::PMaxDbm;
        cfg.sweep_values = {10, 15, 20, 25, 30, 35};
    } else if (name == "fig12") {
        cfg.schemes = mu_schemes;
        cfg.axis = SweepAxis::CoherenceTime;
        cfg.sweep_values = {0.05, 0.1, 0.15, 0.2, 0.25};
    } else if (name == "fig13") {
        cfg.schemes = mu_schemes;
        cfg.axis = SweepAxis::NumAntennas;
        cfg.sweep_values = {2, 4, 6, 8, 10, 12};
    } else {
        throw std::invalid_argument("figure_config: unknown figure " + name);
    }
    validate(cfg);
    return cfg;
}

inline std::vector<ResultRow> reproduce_figure(const std::string& name, const std::string& scale,
                                               std::uint64_t seed = 1, int threads = 1) {
    ExperimentConfig cfg = figure_config(name, scale, seed);
    cfg.threads = threads;
    return run_experiment(cfg);
}

} // namespace maee
