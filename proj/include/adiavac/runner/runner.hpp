#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "adiavac/adiabatic.hpp"
#include "adiavac/background.hpp"
#include "adiavac/bogoliubov.hpp"
#include "adiavac/detector.hpp"
#include "adiavac/modes.hpp"
#include "adiavac/runner/config.hpp"
#include "adiavac/runner/output.hpp"
#include "adiavac/states.hpp"
#include "adiavac/version.hpp"

namespace adiavac::runner {

using json = nlohmann::ordered_json;

struct Check {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    std::string relation;  ///< "<", "<=", ">", ">="
    bool pass = false;
};

struct SuiteReport {
    std::string name;
    std::vector<Check> checks;
    json summary = json::object();
    std::vector<std::string> files;
    std::string error;

    bool passed() const {
        return error.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }

    void expect(std::string what, double value, std::string relation, double limit) {
        bool ok = false;
        if (relation == "<") ok = value < limit;
        else if (relation == "<=") ok = value <= limit;
        else if (relation == ">") ok = value > limit;
        else if (relation == ">=") ok = value >= limit;
        checks.push_back({std::move(what), value, limit, std::move(relation), ok});
    }
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"frequencies", "symbol_orders", "modes",     "bogoliubov",
                                                "particle_numbers", "detector", "invariants"};
    return names;
}

inline bool is_suite(const std::string& s) {
    return s == "all" || std::find(suite_names().begin(), suite_names().end(), s) != suite_names().end();
}

struct RunResult {
    std::vector<SuiteReport> reports;
    std::filesystem::path manifest;
    bool passed() const {
        return std::all_of(reports.begin(), reports.end(), [](const SuiteReport& r) { return r.passed(); });
    }
};

/// Up to `count` distinct integers spread logarithmically over [lo, hi],
/// always including both ends.
inline std::vector<std::int64_t> sampled_modes(std::int64_t lo, std::int64_t hi, std::size_t count) {
    std::vector<std::int64_t> ks;
    if (count == 0) return ks;
    if (count == 1 || lo == hi) return {lo};
    const double a = static_cast<double>(lo) + 1.0, b = static_cast<double>(hi) + 1.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        ks.push_back(std::llround(a * std::pow(b / a, t)) - 1);
    }
    ks.front() = lo;
    ks.back() = hi;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    return ks;
}

inline json ptree_to_json(const pt::ptree& tree) {
    json out = json::object();
    for (const auto& [key, child] : tree) {
        if (child.empty()) {
            out[key] = child.data();
        } else {
            out[key] = ptree_to_json(child);
        }
    }
    return out;
}

inline json fit_json(const LogLogFit& f) {
    return {{"slope", f.slope}, {"slope_stderr", f.slope_stderr}, {"intercept", f.intercept}, {"points", f.points}};
}

class Runner {
public:
    Runner(ExperimentConfig config, std::filesystem::path out_dir)
        : cfg_(std::move(config)), out_(std::move(out_dir)), model_(cfg_.background.model()) {}

    RunResult run(const std::string& suite, std::ostream& log = std::cout) {
        if (!is_suite(suite)) throw InvalidArgument("unknown suite '" + suite + "'");
        std::filesystem::create_directories(out_);
        RunResult result;
        for (const auto& name : suite_names()) {
            if (suite != "all" && suite != name) continue;
            SuiteReport report;
            report.name = name;
            try {
                dispatch(name, report);
            } catch (const std::exception& e) {
                report.error = e.what();
            }
            print(report, log);
            result.reports.push_back(std::move(report));
        }
        result.manifest = write_outputs(suite, result.reports);
        return result;
    }

    const ExperimentConfig& config() const { return cfg_; }

private:
    void dispatch(const std::string& name, SuiteReport& r) {
        if (name == "frequencies") frequencies(r);
        else if (name == "symbol_orders") symbol_orders(r);
        else if (name == "modes") modes(r);
        else if (name == "bogoliubov") bogoliubov(r);
        else if (name == "particle_numbers") particle_numbers(r);
        else if (name == "detector") detector(r);
        else if (name == "invariants") invariants(r);
    }

    void emit(SuiteReport& r, const std::string& file, const CsvTable& table) {
        files_[file] = table.text();
        r.files.push_back(file);
    }

    std::vector<int> sorted_orders() const {
        std::vector<int> n = cfg_.orders;
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
        return n;
    }

    void frequencies(SuiteReport& r) {
        CsvTable table({"k", "n", "omega_sq", "omega_n_sq", "relative_shift", "clamped"});
        double worst_static = 0.0;
        const auto orders = sorted_orders();
        for (std::int64_t k = cfg_.k_min; k <= cfg_.k_max; ++k) {
            const FrequencyLadder ladder = frequency_ladder(model_, k, cfg_.mass, orders.back(), cfg_.t0, cfg_.positivity);
            const double w = std::sqrt(ladder.omega_sq);
            for (int n : orders) {
                const double p = ladder.omega_sq_jets[static_cast<std::size_t>(n)].value();
                const double shift = (std::sqrt(p) - w) / w;
                worst_static = std::max(worst_static, std::abs(shift));
                table.row(k, n, ladder.omega_sq, p, shift, ladder.clamped_level && *ladder.clamped_level <= n);
            }
        }
        emit(r, "frequencies.csv", table);
        if (model_.is_static()) r.expect("static fixed point max |Omega_n - omega|/omega", worst_static, "<", 1e-12);

        if (model_.kind() == ScaleFactorModel::Kind::exponential) {
            // massless check against the closed form omega^2 - 2 H^2
            const double h = model_.hubble();
            const double a = model_.value(cfg_.t0);
            CsvTable massless({"k", "omega_sq", "omega1_sq", "closed_form", "relative_error"});
            double worst = 0.0;
            std::size_t rows = 0;
            for (std::int64_t k = std::max<std::int64_t>(cfg_.k_min, 1); k <= cfg_.k_max; ++k) {
                const double w2 = ModeChannel{k}.eigenvalue() / (a * a);
                const double closed = w2 - 2.0 * h * h;
                if (!(closed > 0.0)) continue;
                const FrequencyLadder ladder = frequency_ladder(model_, k, 0.0, 1, cfg_.t0);
                const double got = ladder.omega_sq_jets[1].value();
                const double err = std::abs(got - closed) / closed;
                worst = std::max(worst, err);
                massless.row(k, w2, got, closed, err);
                ++rows;
            }
            emit(r, "frequencies_massless.csv", massless);
            r.expect("massless de Sitter rows", static_cast<double>(rows), ">", 0.0);
            r.expect("massless de Sitter max relative error", worst, "<", 1e-12);
        }
    }

    void symbol_orders(SuiteReport& r) {
        const auto grid = log_grid(cfg_.omega_lo, cfg_.omega_hi, cfg_.omega_count);
        CsvTable table({"n", "k", "omega", "diff", "slope"});
        json fits = json::object();
        for (int n : sorted_orders()) {
            if (model_.is_static()) {
                double worst = 0.0;
                for (double target : grid) {
                    const auto k = mode_for_frequency(model_, cfg_.mass, target, cfg_.t0);
                    const FrequencyLadder ladder = frequency_ladder(model_, k, cfg_.mass, n + 1, cfg_.t0, cfg_.positivity);
                    const double d = level_difference(ladder, n, n + 1).omega_sq;
                    worst = std::max(worst, std::abs(d) / ladder.omega_sq);
                    table.row(n, k, std::sqrt(ladder.omega_sq), d, 0.0);
                }
                r.expect("static n=" + std::to_string(n) + " max relative increment", worst, "<", 1e-12);
                continue;
            }
            const SymbolProbe probe = symbol_order_probe(model_, cfg_.mass, n, cfg_.t0, grid, cfg_.positivity);
            for (const auto& s : probe.samples) table.row(n, s.k, s.omega, s.diff, probe.fit.slope);
            fits[std::to_string(n)] = fit_json(probe.fit);
            r.expect("n=" + std::to_string(n) + " increment slope", probe.fit.slope, "<=", -2.0 * n + 0.1);
        }
        r.summary["fits"] = fits;
        emit(r, "symbol_orders.csv", table);
    }

    void modes(SuiteReport& r) {
        const auto ks = sampled_modes(cfg_.k_min, cfg_.k_max, cfg_.trajectory_modes);
        const int n = sorted_orders().back();
        CsvTable table({"k", "t", "re_W", "im_W", "re_Wdot", "im_Wdot", "wronskian_drift"});
        std::vector<ModeTrajectory> trajs(ks.size());
        parallel_for(ks.size(), [&](std::size_t i) {
            const ModeInitialData data = adiabatic_initial_data(model_, ks[i], cfg_.mass, n, cfg_.t0, cfg_.positivity);
            trajs[i] = solve_mode(model_, cfg_.mass, data, cfg_.t0, cfg_.t_end, cfg_.solver);
        });
        const double span = std::max(cfg_.t_end - cfg_.t0, std::numeric_limits<double>::min());
        double worst_rate = 0.0, worst_exact = 0.0;
        long steps = 0;
        for (const auto& tr : trajs) {
            steps += tr.stats.steps;
            worst_rate = std::max(worst_rate, tr.stats.max_wronskian_drift / span);
            const double a = model_.value(cfg_.t0);
            const double w = omega_at(model_, tr.k, cfg_.mass, cfg_.t0);
            const double amp = 1.0 / std::sqrt(2.0 * a * a * a * w);
            for (const auto& s : tr.samples) {
                table.row(tr.k, s.t, s.W.real(), s.W.imag(), s.Wdot.real(), s.Wdot.imag(), s.wronskian_drift);
                // exact-solution comparison over the first 20 periods of each mode
                if (model_.is_static() && w * (s.t - cfg_.t0) <= 40.0 * std::numbers::pi) {
                    const cplx exact = amp * std::exp(cplx(0.0, -w * (s.t - cfg_.t0)));
                    worst_exact = std::max(worst_exact, std::abs(s.W - exact) / amp);
                }
            }
        }
        emit(r, "modes.csv", table);
        r.summary["order"] = n;
        r.summary["accepted_steps"] = steps;
        r.expect("max Wronskian drift per unit time", worst_rate, "<=", 10.0 * cfg_.solver.tol);
        if (model_.is_static()) r.expect("static max relative error vs exact mode over 20 periods", worst_exact, "<", 10.0 * cfg_.solver.tol);
    }

    void bogoliubov(SuiteReport& r) {
        const auto orders = sorted_orders();
        if (orders.size() < 2) {
            r.summary["note"] = "fewer than two orders configured";
            return;
        }
        CsvTable table({"n1", "n2", "k", "abs_alpha", "abs_beta", "unitarity_defect", "partial_sum"});
        json scans = json::array();
        double worst_defect = 0.0, worst_beta = 0.0;
        std::vector<double> exponents;
        for (std::size_t i = 0; i + 1 < orders.size(); ++i) {
            const int n1 = orders[i], n2 = orders[i + 1];
            const TraceDiagnostics d =
                order_vs_order_scan(model_, cfg_.mass, n1, n2, cfg_.t0, cfg_.k_min, cfg_.k_max, cfg_.positivity);
            for (std::size_t j = 0; j < d.pairs.size(); ++j) {
                const auto& p = d.pairs[j];
                table.row(n1, n2, p.k, std::abs(p.alpha), std::abs(p.beta), p.unitarity_defect(), d.partial_sums[j]);
                worst_beta = std::max(worst_beta, std::abs(p.beta));
            }
            worst_defect = std::max(worst_defect, d.max_unitarity_defect());
            json s = {{"n1", n1}, {"n2", n2}, {"cutoff", d.cutoff}, {"trace_sum", d.partial_sums.back()},
                      {"verdict", to_string(d.verdict)}, {"degenerate_fit", d.degenerate_fit}};
            if (d.fit) {
                s["decay_exponent"] = d.decay_exponent();
                s["fit"] = fit_json(*d.fit);
                exponents.push_back(d.decay_exponent());
            }
            scans.push_back(s);
        }
        r.summary["scans"] = scans;
        emit(r, "bogoliubov.csv", table);
        r.expect("max unitarity defect", worst_defect, "<", 1e-9);
        if (model_.is_static()) r.expect("static max |beta|", worst_beta, "<", 1e-10);
        for (std::size_t i = 0; i + 1 < exponents.size(); ++i) {
            r.expect("decay exponent step " + std::to_string(i) + " to " + std::to_string(i + 1),
                     exponents[i + 1] - exponents[i], ">=", 0.0);
        }
    }

    void particle_numbers(SuiteReport& r) {
        CsvTable table({"n", "k", "number", "unitarity_defect", "cumulative_density"});
        json spectra = json::array();
        double worst_defect = 0.0, worst_beta = 0.0;
        for (int n : sorted_orders()) {
            const ParticleSpectrum s = particle_number_evolution(model_, cfg_.mass, n, cfg_.t0, cfg_.t_end, cfg_.k_min,
                                                                 cfg_.k_max, cfg_.solver, cfg_.positivity);
            for (std::size_t j = 0; j < s.modes.size(); ++j) {
                const auto& pn = s.modes[j];
                table.row(n, pn.k, pn.number, pn.pair.unitarity_defect(), s.cumulative_density[j]);
                worst_defect = std::max(worst_defect, pn.pair.unitarity_defect());
                worst_beta = std::max(worst_beta, std::abs(pn.pair.beta));
            }
            json j = {{"n", n}, {"total_density", s.total_density()}, {"upper_half_fraction", s.upper_half_fraction}};
            if (s.fit) j["fit"] = fit_json(*s.fit);
            spectra.push_back(j);
        }
        r.summary["spectra"] = spectra;
        emit(r, "particle_numbers.csv", table);
        r.expect("max unitarity defect", worst_defect, "<", 1e-9);
        if (model_.is_static()) r.expect("static max |beta|", worst_beta, "<", 1e-10);
    }

    void detector(SuiteReport& r) {
        const auto& d = cfg_.detector;
        const auto energies = log_grid(d.e_lo, d.e_hi, d.e_count);
        DetectorOptions opts;
        opts.solver = cfg_.solver;
        opts.solver.tol = d.tol;
        opts.points_per_period = d.points_per_period;
        opts.positivity = cfg_.positivity;
        std::vector<int> orders = d.orders;
        std::sort(orders.begin(), orders.end());
        orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

        CsvTable table({"n", "E", "F", "converged", "upper_half_share", "quadrature_error", "F_doubled_cutoff",
                        "cutoff_change"});
        json fits = json::array();
        double min_f = std::numeric_limits<double>::infinity();
        std::vector<double> slopes;
        for (int n : orders) {
            const ResponseCurve c = detector_response(model_, cfg_.mass, n, cfg_.t0, d.window, energies, d.cutoff, opts);
            std::vector<double> doubled(c.values.size(), std::numeric_limits<double>::quiet_NaN());
            if (d.check_doubling) {
                doubled = detector_response(model_, cfg_.mass, n, cfg_.t0, d.window, energies, 2 * d.cutoff, opts).values;
            }
            double worst_change = 0.0, worst_quad = 0.0;
            bool certified = true;
            for (std::size_t i = 0; i < c.energies.size(); ++i) {
                const double change = std::abs(doubled[i] - c.values[i]) / c.values[i];
                table.row(n, c.energies[i], c.values[i], static_cast<bool>(c.converged[i]), c.upper_half_share[i],
                          c.quadrature_error[i], doubled[i], change);
                min_f = std::min(min_f, c.values[i]);
                if (c.energies[i] >= d.fit_lo && c.energies[i] <= d.fit_hi) {
                    certified = certified && c.converged[i];
                    worst_quad = std::max(worst_quad, c.quadrature_error[i]);
                    if (d.check_doubling) worst_change = std::max(worst_change, change);
                }
            }
            const LogLogFit fit = slope_fit(c, d.fit_lo, d.fit_hi);
            slopes.push_back(fit.slope);
            const auto bracket = bracket_exponent(2.0 * n);
            json j = {{"n", n}, {"cutoff", c.cutoff}, {"fit_window", {d.fit_lo, d.fit_hi}}, {"fit", fit_json(fit)},
                      {"min_cutoff_frequency", c.min_cutoff_frequency}};
            j["predicted_bound_exponent"] = bracket ? json(*bracket) : json(nullptr);
            fits.push_back(j);
            const std::string tag = "n=" + std::to_string(n) + " ";
            r.expect(tag + "fit window converged in K", certified ? 1.0 : 0.0, ">=", 1.0);
            r.expect(tag + "fit window quadrature error", worst_quad, "<", 1e-6);
            if (d.check_doubling) r.expect(tag + "fit window change on doubling K", worst_change, "<", 0.01);
            if (model_.is_static()) r.expect(tag + "static slope", fit.slope, "<", d.static_slope_max);
        }
        r.expect("min F(E)", min_f, ">=", 0.0);
        if (!model_.is_static()) {
            for (std::size_t i = 0; i + 1 < slopes.size(); ++i) {
                r.expect("slope(n=" + std::to_string(orders[i + 1]) + ") - slope(n=" + std::to_string(orders[i]) + ")",
                         slopes[i + 1] - slopes[i], "<=", -d.slope_margin);
            }
        }
        r.summary["window"] = {{"kind", d.window.kind_name()}, {"tau_a", d.window.tau_a}, {"tau_b", d.window.tau_b}};
        r.summary["fits"] = fits;
        emit(r, "detector.csv", table);
    }

    void invariants(SuiteReport& r) {
        CsvTable table({"check", "n", "k", "value"});
        std::mt19937_64 rng(cfg_.seed);
        // purity over random (r, Omega); rounding the entries of S alone
        // leaves a defect near eps (r/Omega)^2, so |r|/Omega stays <= 10
        std::uniform_real_distribution<double> ur(-10.0, 10.0), ulog(0.0, std::log(100.0));
        double worst_purity = 0.0;
        for (std::size_t i = 0; i < cfg_.ensemble_size; ++i) {
            const double rr = ur(rng), om = std::exp(ulog(rng));
            const Matrix2 s = purity_matrix(rr, om);
            worst_purity = std::max(worst_purity, frobenius_distance(multiply(s, s), s));
        }
        table.row("purity_random", -1, -1, worst_purity);
        r.expect("random (r, Omega) max ||S^2 - S||_F", worst_purity, "<", 1e-12);

        double worst_wr = 0.0, worst_state_purity = 0.0, worst_psd = 0.0, worst_cs = 0.0;
        std::normal_distribution<double> g(0.0, 1.0);
        json ratios = json::array();
        double worst_ratio = 0.0;
        for (int n : sorted_orders()) {
            std::vector<ModeQuasifreeState> states;
            for (std::int64_t k = cfg_.k_min; k <= cfg_.k_max; ++k) {
                const RJMultipliers rj = rj_multipliers(model_, k, cfg_.mass, n, cfg_.t0, cfg_.positivity);
                states.push_back(ModeQuasifreeState::from(rj, k, cfg_.t0));
                const ModeInitialData data = initial_data_from_multipliers(model_, k, cfg_.t0, rj);
                worst_wr = std::max(worst_wr, std::abs(wronskian(model_, data) - cplx(0.0, 1.0)));
                const ModeQuasifreeState& st = states.back();
                worst_state_purity = std::max(worst_state_purity, purity_check(st));
                const auto [lo, hi] = hermitian_eigenvalues(st.mu_matrix());
                worst_psd = std::max(worst_psd, -lo / hi);
                const PhasePoint f1{g(rng), g(rng)}, f2{g(rng), g(rng)};
                const double lhs = std::pow(st.sigma(f1, f2), 2);
                const double rhs = 4.0 * st.mu(f1, f1) * st.mu(f2, f2);
                worst_cs = std::max(worst_cs, (lhs - rhs) / rhs);
            }
            const RatioExtremes ex = mu_sobolev_ratio(states, cfg_.ensemble_size, cfg_.seed + static_cast<std::uint64_t>(n),
                                                      cfg_.modes_per_sample);
            const double ratio = ex.max / ex.min;
            worst_ratio = std::max(worst_ratio, ratio);
            table.row("sobolev_ratio_min", n, -1, ex.min);
            table.row("sobolev_ratio_max", n, -1, ex.max);
            ratios.push_back({{"n", n}, {"min", ex.min}, {"max", ex.max}, {"samples", ex.samples}});
        }
        table.row("wronskian", -1, -1, worst_wr);
        table.row("purity_states", -1, -1, worst_state_purity);
        table.row("mu_negativity", -1, -1, worst_psd);
        table.row("cauchy_schwarz_excess", -1, -1, worst_cs);
        r.summary["sobolev_ratios"] = ratios;
        emit(r, "invariants.csv", table);
        r.expect("initial data |Wronskian - i|", worst_wr, "<", 1e-12);
        r.expect("mode states max ||S^2 - S||_F", worst_state_purity, "<", 1e-12);
        r.expect("mu relative negativity", worst_psd, "<=", 1e-12);
        r.expect("Cauchy-Schwarz relative excess", worst_cs, "<=", 1e-12);
        r.expect("Sobolev ratio max/min", worst_ratio, "<", 100.0);
    }

    static void print(const SuiteReport& r, std::ostream& log) {
        log << "[" << (r.passed() ? "PASS" : "FAIL") << "] " << r.name << "\n";
        for (const auto& c : r.checks) {
            log << "    " << (c.pass ? "ok  " : "FAIL") << " " << c.name << ": " << format_number(c.value) << " "
                << c.relation << " " << format_number(c.limit) << "\n";
        }
        if (!r.error.empty()) log << "    error: " << r.error << "\n";
    }

    std::filesystem::path write_outputs(const std::string& suite, const std::vector<SuiteReport>& reports) {
        json manifest;
        manifest["tool"] = "adiavac";
        manifest["version"] = version;
        manifest["suite"] = suite;
        manifest["config_source"] = cfg_.source;
        manifest["config"] = ptree_to_json(cfg_.tree);
        json suites = json::array();
        bool all = true;
        for (const auto& r : reports) {
            json checks = json::array();
            for (const auto& c : r.checks) {
                checks.push_back({{"name", c.name}, {"value", c.value}, {"relation", c.relation},
                                  {"limit", c.limit}, {"pass", c.pass}});
            }
            json s = {{"name", r.name}, {"passed", r.passed()}, {"checks", checks}, {"summary", r.summary},
                      {"files", r.files}};
            if (!r.error.empty()) s["error"] = r.error;
            suites.push_back(s);
            all = all && r.passed();
        }
        manifest["suites"] = suites;
        manifest["passed"] = all;
        json listed = json::array();
        for (const auto& [name, content] : files_) {
            write_file(out_ / name, content);
            listed.push_back({{"path", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
        }
        manifest["files"] = listed;
        const auto path = out_ / "manifest.json";
        write_file(path, manifest.dump(2) + "\n");
        return path;
    }

    ExperimentConfig cfg_;
    std::filesystem::path out_;
    ScaleFactorModel model_;
    std::map<std::string, std::string> files_;
};

}  // namespace adiavac::runner
