#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "adiavac/adiabatic.hpp"
#include "adiavac/background.hpp"
#include "adiavac/detector.hpp"
#include "adiavac/errors.hpp"
#include "adiavac/modes.hpp"

namespace adiavac::runner {

namespace pt = boost::property_tree;

struct BackgroundSpec {
    std::string kind = "constant";
    double amplitude = 1.0;
    double exponent = 0.5;
    double hubble = 1.0;
    double t_ref = 0.0;
    std::vector<double> taylor_coeffs;

    ScaleFactorModel model() const {
        if (kind == "constant") return ScaleFactorModel::constant(amplitude);
        if (kind == "power_law") return ScaleFactorModel::power_law(exponent, t_ref);
        if (kind == "exponential") return ScaleFactorModel::exponential(hubble);
        return ScaleFactorModel::taylor(taylor_coeffs, t_ref);
    }
};

struct DetectorSpec {
    WindowFunction window = WindowFunction::smooth_bump(-10.0, 10.0);
    std::vector<int> orders{1, 2};
    std::int64_t cutoff = 200;
    double e_lo = 2.0;
    double e_hi = 20.0;
    std::size_t e_count = 25;
    double fit_lo = 10.0;
    double fit_hi = 20.0;
    double points_per_period = 12.0;
    double tol = 1e-12;
    bool check_doubling = false;
    /// Static backgrounds only: required fitted slope bound.
    double static_slope_max = -8.0;
    /// Non-static backgrounds: required steepening of the slope per order step.
    double slope_margin = 0.0;
};

struct ExperimentConfig {
    std::string source;  ///< path the config was read from
    pt::ptree tree;      ///< raw key/value content, echoed into the manifest
    std::uint64_t seed = 20240601;

    BackgroundSpec background;
    double mass = 1.0;
    double t0 = 0.0;
    std::vector<int> orders{0, 1, 2};
    PositivityAction positivity;

    std::int64_t k_min = 1;
    std::int64_t k_max = 200;
    double t_end = 10.0;
    std::size_t trajectory_modes = 3;

    double omega_lo = 1e2;
    double omega_hi = 1e5;
    std::size_t omega_count = 16;

    ModeSolverOptions solver;

    std::size_t ensemble_size = 10000;
    std::size_t modes_per_sample = 8;

    DetectorSpec detector;
    std::filesystem::path output_dir = "results";
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigInvalid(key + ": not a number: '" + raw + "'");
    }
    if (!std::isfinite(v)) throw ConfigInvalid(key + ": must be finite");
    return v;
}

inline std::int64_t parse_int(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigInvalid(key + ": not an integer: '" + raw + "'");
    }
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigInvalid(key + ": not a boolean: '" + raw + "'");
}

inline std::vector<std::string> split_list(const std::string& raw) {
    std::vector<std::string> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

class Reader {
public:
    explicit Reader(const pt::ptree& t) : tree_(t) {}

    std::optional<std::string> raw(const std::string& key) const {
        if (auto v = tree_.get_optional<std::string>(key)) return *v;
        return std::nullopt;
    }
    double number(const std::string& key, double fallback) const {
        auto r = raw(key);
        return r ? parse_double(key, *r) : fallback;
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback) const {
        auto r = raw(key);
        return r ? parse_int(key, *r) : fallback;
    }
    bool boolean(const std::string& key, bool fallback) const {
        auto r = raw(key);
        return r ? parse_bool(key, *r) : fallback;
    }
    std::string text(const std::string& key, const std::string& fallback) const {
        auto r = raw(key);
        return r ? trim(*r) : fallback;
    }
    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        if (auto r = raw(key)) {
            for (const auto& item : split_list(*r)) out.push_back(parse_double(key, item));
        }
        return out;
    }
    std::vector<int> integers(const std::string& key, std::vector<int> fallback) const {
        auto r = raw(key);
        if (!r) return fallback;
        std::vector<int> out;
        for (const auto& item : split_list(*r)) out.push_back(static_cast<int>(parse_int(key, item)));
        return out;
    }

private:
    const pt::ptree& tree_;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigInvalid(what);
}

}  // namespace detail

/// Validates field ranges; throws ConfigInvalid naming the first offending key.
inline void validate(const ExperimentConfig& c) {
    using detail::require;
    const auto& b = c.background;
    require(b.kind == "constant" || b.kind == "power_law" || b.kind == "exponential" || b.kind == "taylor",
            "background.kind: unknown model '" + b.kind + "'");
    if (b.kind == "constant") require(b.amplitude > 0.0, "background.a must be positive");
    if (b.kind == "taylor") {
        require(!b.taylor_coeffs.empty(), "background.coeffs must be non-empty");
        require(b.taylor_coeffs.front() > 0.0, "background.coeffs: a(t_ref) must be positive");
    }
    if (b.kind == "power_law") require(b.exponent > 0.0 && c.t0 > b.t_ref, "power_law needs p > 0 and t0 > t_ref");
    require(c.mass > 0.0, "field.mass must be positive");
    require(!c.orders.empty(), "field.orders must be non-empty");
    for (int n : c.orders) require(n >= 0, "field.orders must be non-negative");
    require(c.positivity.floor_fraction > 0.0 && c.positivity.floor_fraction < 1.0,
            "field.floor_fraction must lie in (0, 1)");
    require(c.k_min >= 0 && c.k_max >= c.k_min, "modes: k range must be non-empty");
    require(c.t_end >= c.t0, "modes.t_end must not precede field.t0");
    require(c.omega_lo > 0.0 && c.omega_hi > c.omega_lo && c.omega_count >= 2, "symbol: invalid frequency grid");
    require(c.solver.tol > 0.0 && c.solver.wronskian_tolerance > 0.0, "solver tolerances must be positive");
    require(c.solver.min_steps_per_period > 0.0, "solver.min_steps_per_period must be positive");
    require(c.ensemble_size > 0 && c.modes_per_sample > 0, "invariants: ensemble must be non-empty");
    const auto& d = c.detector;
    require(d.window.tau_b > d.window.tau_a, "detector: window support must be non-empty");
    require(d.window.width > 0.0, "detector.width must be positive");
    require(!d.orders.empty(), "detector.orders must be non-empty");
    for (int n : d.orders) require(n >= 0, "detector.orders must be non-negative");
    require(d.cutoff >= 0, "detector.cutoff must be non-negative");
    require(d.e_lo > 0.0 && d.e_hi > d.e_lo && d.e_count >= 2, "detector: invalid energy grid");
    require(d.fit_hi > d.fit_lo, "detector: invalid fit window");
    require(d.points_per_period >= 10.0, "detector.points_per_period must be at least 10");
    require(d.tol > 0.0, "detector.tol must be positive");
    require(d.slope_margin >= 0.0, "detector.slope_margin must be non-negative");
    if (b.kind == "power_law") {
        require(std::min(d.window.tau_a, c.t0) > b.t_ref, "detector window must lie after the power-law origin");
    }
}

inline const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"run", {"seed"}},
        {"background", {"kind", "a", "p", "H", "t_ref", "coeffs"}},
        {"field", {"mass", "t0", "orders", "positivity", "floor_fraction"}},
        {"modes", {"k_min", "k_max", "t_end", "trajectory_modes"}},
        {"symbol", {"omega_lo", "omega_hi", "samples"}},
        {"solver", {"tol", "min_steps_per_period", "wronskian_tolerance"}},
        {"invariants", {"ensemble_size", "modes_per_sample"}},
        {"detector", {"window", "tau_a", "tau_b", "width", "orders", "cutoff", "e_lo", "e_hi", "e_count", "fit_lo",
                      "fit_hi", "points_per_period", "tol", "check_doubling", "static_slope_max", "slope_margin"}},
        {"output", {"dir"}},
    };
    return keys;
}

inline ExperimentConfig parse_config(const pt::ptree& tree, std::string source = {}) {
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) throw ConfigInvalid("unknown section [" + section + "]");
        if (body.empty()) throw ConfigInvalid("key '" + section + "' outside a section");
        for (const auto& [key, value] : body) {
            if (!it->second.contains(key)) throw ConfigInvalid("unknown key " + section + "." + key);
        }
    }
    detail::Reader r(tree);
    ExperimentConfig c;
    c.source = std::move(source);
    c.tree = tree;
    c.seed = static_cast<std::uint64_t>(r.integer("run.seed", static_cast<std::int64_t>(c.seed)));

    auto& b = c.background;
    b.kind = r.text("background.kind", b.kind);
    b.amplitude = r.number("background.a", b.amplitude);
    b.exponent = r.number("background.p", b.exponent);
    b.hubble = r.number("background.H", b.hubble);
    b.t_ref = r.number("background.t_ref", b.t_ref);
    b.taylor_coeffs = r.numbers("background.coeffs");

    c.mass = r.number("field.mass", c.mass);
    c.t0 = r.number("field.t0", c.t0);
    c.orders = r.integers("field.orders", c.orders);
    const std::string pos = r.text("field.positivity", "strict");
    if (pos == "strict") {
        c.positivity.mode = PositivityAction::Mode::strict;
    } else if (pos == "clamped") {
        c.positivity.mode = PositivityAction::Mode::clamped;
    } else {
        throw ConfigInvalid("field.positivity: expected strict or clamped, got '" + pos + "'");
    }
    c.positivity.floor_fraction = r.number("field.floor_fraction", c.positivity.floor_fraction);

    c.k_min = r.integer("modes.k_min", c.k_min);
    c.k_max = r.integer("modes.k_max", c.k_max);
    c.t_end = r.number("modes.t_end", c.t_end);
    const auto traj = r.integer("modes.trajectory_modes", static_cast<std::int64_t>(c.trajectory_modes));
    detail::require(traj >= 0, "modes.trajectory_modes must be non-negative");
    c.trajectory_modes = static_cast<std::size_t>(traj);

    c.omega_lo = r.number("symbol.omega_lo", c.omega_lo);
    c.omega_hi = r.number("symbol.omega_hi", c.omega_hi);
    const auto oc = r.integer("symbol.samples", static_cast<std::int64_t>(c.omega_count));
    detail::require(oc >= 0, "symbol.samples must be non-negative");
    c.omega_count = static_cast<std::size_t>(oc);

    c.solver.tol = r.number("solver.tol", c.solver.tol);
    c.solver.min_steps_per_period = r.number("solver.min_steps_per_period", c.solver.min_steps_per_period);
    c.solver.wronskian_tolerance = r.number("solver.wronskian_tolerance", c.solver.wronskian_tolerance);

    const auto es = r.integer("invariants.ensemble_size", static_cast<std::int64_t>(c.ensemble_size));
    const auto mps = r.integer("invariants.modes_per_sample", static_cast<std::int64_t>(c.modes_per_sample));
    detail::require(es >= 0 && mps >= 0, "invariants: sizes must be non-negative");
    c.ensemble_size = static_cast<std::size_t>(es);
    c.modes_per_sample = static_cast<std::size_t>(mps);

    auto& d = c.detector;
    const std::string wkind = r.text("detector.window", "smooth_bump");
    const double ta = r.number("detector.tau_a", d.window.tau_a);
    const double tb = r.number("detector.tau_b", d.window.tau_b);
    if (wkind == "smooth_bump") {
        d.window = WindowFunction::smooth_bump(ta, tb);
    } else if (wkind == "gaussian_truncated") {
        d.window = WindowFunction::gaussian_truncated(ta, tb, r.number("detector.width", 0.25));
    } else {
        throw ConfigInvalid("detector.window: unknown window '" + wkind + "'");
    }
    d.orders = r.integers("detector.orders", d.orders);
    d.cutoff = r.integer("detector.cutoff", d.cutoff);
    d.e_lo = r.number("detector.e_lo", d.e_lo);
    d.e_hi = r.number("detector.e_hi", d.e_hi);
    const auto ec = r.integer("detector.e_count", static_cast<std::int64_t>(d.e_count));
    detail::require(ec >= 0, "detector.e_count must be non-negative");
    d.e_count = static_cast<std::size_t>(ec);
    d.fit_lo = r.number("detector.fit_lo", d.fit_lo);
    d.fit_hi = r.number("detector.fit_hi", d.fit_hi);
    d.points_per_period = r.number("detector.points_per_period", d.points_per_period);
    d.tol = r.number("detector.tol", d.tol);
    d.check_doubling = r.boolean("detector.check_doubling", d.check_doubling);
    d.static_slope_max = r.number("detector.static_slope_max", d.static_slope_max);
    d.slope_margin = r.number("detector.slope_margin", d.slope_margin);

    c.output_dir = r.text("output.dir", c.output_dir.string());

    validate(c);
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigInvalid(e.what());
    }
    return parse_config(tree, path.string());
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigInvalid(e.what());
    }
    return parse_config(tree, "<string>");
}

}  // namespace adiavac::runner
