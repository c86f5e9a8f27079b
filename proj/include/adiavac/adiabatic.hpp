#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adiavac/background.hpp"
#include "adiavac/errors.hpp"
#include "adiavac/jet.hpp"
#include "adiavac/numeric.hpp"

namespace adiavac {

/// What to do when the recursion makes (Omega^(n))^2 small or negative.
struct PositivityAction {
    enum class Mode { strict, clamped };
    Mode mode = Mode::strict;
    /// Clamped mode floors (Omega^(n))^2(t0) at floor_fraction * omega^2.
    double floor_fraction = 1e-6;

    static PositivityAction strict() { return {}; }
    static PositivityAction clamped(double eps = 1e-6) { return {Mode::clamped, eps}; }
};

/// Jet order needed to carry order n through the recursion and still read
/// off d/dt log Omega^(n); each step consumes two orders.
constexpr std::size_t recursion_jet_order(int n) { return 2 * static_cast<std::size_t>(n) + 3; }

/// All levels 0..n of the generalized-frequency recursion for one mode at
/// the Cauchy time t0.
///
/// Level j carries P_j = (Omega^(j))^2 and L_j = d/dt log P_j as jets.
/// Successive increments delta_j = P_{j+1} - P_j and L_{j+1} - L_j are
/// propagated directly rather than formed by subtraction, so they keep full
/// relative precision even when they are 30 decades below P_j.
struct FrequencyLadder {
    std::int64_t k = 0;
    double mass = 0.0;
    double t0 = 0.0;
    double omega_sq = 0.0;      ///< omega_k(t0)^2
    double hubble_rate = 0.0;   ///< a'/a at t0
    std::vector<Jet> omega_sq_jets;   ///< P_j
    std::vector<Jet> log_rate_jets;   ///< L_j
    std::vector<Jet> increment_jets;  ///< delta_j, j < levels-1
    std::vector<double> log_rate_increments;  ///< L_{j+1} - L_j at t0
    /// First level whose value was floored, if any.
    std::optional<int> clamped_level;

    int top_level() const noexcept { return static_cast<int>(omega_sq_jets.size()) - 1; }
};

namespace detail {

inline void enforce_positivity(Jet& p, std::int64_t k, int level, double omega_sq, const PositivityAction& action,
                               std::optional<int>& clamped_level) {
    if (action.mode == PositivityAction::Mode::strict) {
        if (!(p.value() > 0.0)) throw FrequencySquaredNonPositive(k, level, p.value());
        return;
    }
    const double floor = action.floor_fraction * omega_sq;
    if (p.value() < floor) {
        p = p.with_value(floor);
        if (!clamped_level) clamped_level = level;
    }
}

}  // namespace detail

/// Runs the squared-form recursion up to level n_max with jets of order d.
///
/// Uses increments: with dL_j = L_j - L_{j-1},
///   dL_j    = (delta_{j-1}' - L_{j-1} delta_{j-1}) / P_j
///   delta_j = dL_j (2 L_{j-1} + dL_j) / 16 - dL_j' / 4.
/// After a clamp the increments no longer telescope, so later levels fall
/// back to the literal recursion.
inline FrequencyLadder frequency_ladder(const ScaleFactorModel& model, std::int64_t k, double m, int n_max, double t0,
                                        const PositivityAction& action = {}, std::size_t d = 0) {
    if (n_max < 0) throw InvalidArgument("adiabatic order must be non-negative");
    if (d == 0) d = recursion_jet_order(n_max);
    if (d < 2 * static_cast<std::size_t>(n_max) + 1) {
        throw OrderUnavailable("jet order too small for requested adiabatic order");
    }
    check_mass(k, m);

    FrequencyLadder ladder;
    ladder.k = k;
    ladder.mass = m;
    ladder.t0 = t0;

    const Jet a = model.jet_at(t0, d);
    const Jet p0 = ModeChannel{k}.eigenvalue() / square(a) + m * m;
    ladder.omega_sq = p0.value();
    const Jet a_rate = a.differentiate() / a.truncated(d - 1);
    ladder.hubble_rate = a_rate.value();
    if (n_max == 0) {
        ladder.omega_sq_jets.push_back(p0);
        ladder.log_rate_jets.push_back(p0.differentiate() / p0.truncated(d - 1));
        return ladder;
    }

    // -3/4 (a'/a)^2 - 3/2 a''/a, order d-2
    const Jet a_acc = a.differentiate().differentiate() / a.truncated(d - 2);
    const Jet geometric = -0.75 * square(a_rate.truncated(d - 2)) - 1.5 * a_acc;
    const Jet base = p0.truncated(d - 2) + geometric;

    ladder.omega_sq_jets.push_back(p0);
    ladder.log_rate_jets.push_back(p0.differentiate() / p0.truncated(d - 1));
    std::vector<Jet> log_rate_increment_jets;  // dL_{j+1}, parallel to increment_jets

    for (int j = 0; j < n_max; ++j) {
        const Jet& p = ladder.omega_sq_jets.back();
        const Jet& l = ladder.log_rate_jets.back();
        const std::size_t ord = l.order();  // P_j has order ord + 1
        if (ord < 1) throw OrderUnavailable("jet order exhausted by recursion");
        Jet delta = Jet::constant(t0, 0.0, ord - 1);
        Jet next_p = delta;
        if (ladder.clamped_level) {
            // P_{j+1} = base + L_j^2/16 - L_j'/4
            next_p = base.truncated(ord - 1) + square(l.truncated(ord - 1)) / 16.0 - 0.25 * l.differentiate();
            delta = next_p - p.truncated(ord - 1);
        } else {
            if (j == 0) {
                delta = geometric.truncated(ord - 1) + square(l.truncated(ord - 1)) / 16.0 - 0.25 * l.differentiate();
            } else {
                const Jet& dl = log_rate_increment_jets.back();  // L_j - L_{j-1}, order ord
                const Jet lprev = ladder.log_rate_jets[static_cast<std::size_t>(j) - 1].truncated(ord - 1);
                const Jet dlt = dl.truncated(ord - 1);
                delta = dlt * (2.0 * lprev + dlt) / 16.0 - 0.25 * dl.differentiate();
            }
            next_p = p.truncated(ord - 1) + delta;
        }
        detail::enforce_positivity(next_p, k, j + 1, ladder.omega_sq, action, ladder.clamped_level);
        const std::size_t no = next_p.order();
        if (no < 1) throw OrderUnavailable("jet order exhausted by recursion");
        Jet next_l = next_p.differentiate() / next_p.truncated(no - 1);
        Jet dl = next_l - l.truncated(no - 1);
        if (!ladder.clamped_level) {
            dl = (delta.differentiate() - l.truncated(no - 1) * delta.truncated(no - 1)) / next_p.truncated(no - 1);
            next_l = l.truncated(no - 1) + dl;
        }
        ladder.log_rate_increments.push_back(dl.value());
        log_rate_increment_jets.push_back(std::move(dl));
        ladder.increment_jets.push_back(std::move(delta));
        ladder.omega_sq_jets.push_back(std::move(next_p));
        ladder.log_rate_jets.push_back(std::move(next_l));
    }
    return ladder;
}

/// Reference implementation of the same recursion that forms every level
/// literally from P_{j+1} = base + L_j^2/16 - L_j'/4 (no increments).
/// Loses relative precision in the differences at large omega; kept as the
/// second route for cross-checks.
inline std::vector<Jet> frequency_ladder_literal(const ScaleFactorModel& model, std::int64_t k, double m, int n_max,
                                                 double t0) {
    check_mass(k, m);
    const std::size_t d = recursion_jet_order(n_max);
    const Jet a = model.jet_at(t0, d);
    const Jet p0 = ModeChannel{k}.eigenvalue() / square(a) + m * m;
    std::vector<Jet> levels{p0};
    if (n_max == 0) return levels;
    const Jet a_rate = a.differentiate().truncated(d - 2) / a.truncated(d - 2);
    const Jet a_acc = a.differentiate().differentiate() / a.truncated(d - 2);
    const Jet base = p0.truncated(d - 2) - 0.75 * square(a_rate) - 1.5 * a_acc;
    for (int j = 0; j < n_max; ++j) {
        const Jet& p = levels.back();
        const std::size_t o = p.order();
        const Jet l = p.differentiate() / p.truncated(o - 1);
        levels.push_back(base.truncated(o - 2) + square(l.truncated(o - 2)) / 16.0 - 0.25 * l.differentiate());
    }
    return levels;
}

/// (Omega_k^(n))^2 at the Cauchy time, as a jet.
struct AdiabaticFrequency {
    int n = 0;
    std::int64_t k = 0;
    Jet omega_sq_jet;
    PositivityAction positivity_action;
    bool clamped = false;

    double omega() const { return std::sqrt(omega_sq_jet.value()); }
    /// d/dt log Omega = (d/dt Omega^2) / (2 Omega^2)
    double log_derivative() const { return 0.5 * omega_sq_jet[1] / omega_sq_jet.value(); }
};

inline AdiabaticFrequency adiabatic_frequency(const ScaleFactorModel& model, std::int64_t k, double m, int n, double t0,
                                              const PositivityAction& action = {}) {
    const FrequencyLadder ladder = frequency_ladder(model, k, m, n, t0, action);
    return AdiabaticFrequency{n, k, ladder.omega_sq_jets.back(), action, ladder.clamped_level.has_value()};
}

/// Per-mode multipliers of the R and J operators at t0.
struct RJMultipliers {
    double r = 0.0;      ///< -(3 a'/a + Omega'/Omega) / 2
    double omega = 0.0;  ///< Omega^(n)(t0) > 0
    bool clamped = false;
};

inline RJMultipliers rj_from_ladder(const FrequencyLadder& ladder, int n) {
    if (n < 0 || n > ladder.top_level()) throw InvalidArgument("order outside computed ladder");
    const auto idx = static_cast<std::size_t>(n);
    const double log_rate = ladder.log_rate_jets[idx].value();  // d/dt log Omega^2
    RJMultipliers rj;
    rj.omega = std::sqrt(ladder.omega_sq_jets[idx].value());
    rj.r = -0.5 * (3.0 * ladder.hubble_rate + 0.5 * log_rate);
    rj.clamped = ladder.clamped_level.has_value() && *ladder.clamped_level <= n;
    return rj;
}

inline RJMultipliers rj_multipliers(const ScaleFactorModel& model, std::int64_t k, double m, int n, double t0,
                                    const PositivityAction& action = {}) {
    return rj_from_ladder(frequency_ladder(model, k, m, n, t0, action), n);
}

/// Differences between two levels of one ladder, free of cancellation when
/// no clamp intervened.
struct LevelDifference {
    double omega_sq = 0.0;  ///< P_hi - P_lo
    double r = 0.0;         ///< r_hi - r_lo
    double omega = 0.0;     ///< Omega_hi - Omega_lo
};

inline LevelDifference level_difference(const FrequencyLadder& ladder, int lo, int hi) {
    if (lo < 0 || hi > ladder.top_level() || lo > hi) throw InvalidArgument("invalid ladder levels");
    LevelDifference diff;
    const auto ulo = static_cast<std::size_t>(lo), uhi = static_cast<std::size_t>(hi);
    const double p_lo = ladder.omega_sq_jets[ulo].value();
    const double p_hi = ladder.omega_sq_jets[uhi].value();
    if (ladder.clamped_level && *ladder.clamped_level <= hi) {
        diff.omega_sq = p_hi - p_lo;
        diff.r = -0.25 * (ladder.log_rate_jets[uhi].value() - ladder.log_rate_jets[ulo].value());
    } else {
        CompensatedSum dp, dl;
        for (std::size_t j = ulo; j < uhi; ++j) {
            dp += ladder.increment_jets[j].value();
            dl += ladder.log_rate_increments[j];
        }
        diff.omega_sq = dp.value();
        diff.r = -0.25 * dl.value();
    }
    diff.omega = diff.omega_sq / (std::sqrt(p_lo) + std::sqrt(p_hi));
    return diff;
}

/// Mode index whose omega_k(t0) is closest to the requested value.
inline std::int64_t mode_for_frequency(const ScaleFactorModel& model, double m, double omega, double t0) {
    const double a = model.value(t0);
    const double x = a * a * (omega * omega - m * m);
    if (x <= 0.0) return 0;
    return std::max<std::int64_t>(0, std::llround(std::sqrt(1.0 + x) - 1.0));
}

struct SymbolSample {
    std::int64_t k = 0;
    double omega = 0.0;
    double diff = 0.0;  ///< (Omega^(n+1))^2 - (Omega^(n))^2 at t0
};

struct SymbolProbe {
    int n = 0;
    std::vector<SymbolSample> samples;
    LogLogFit fit;
};

/// Fits log|(Omega^(n+1))^2 - (Omega^(n))^2| against log omega; a slope
/// at or below -2n certifies the symbol order of the increment.
inline SymbolProbe symbol_order_probe(const ScaleFactorModel& model, double m, int n, double t0,
                                      std::span<const double> omega_grid, const PositivityAction& action = {}) {
    if (omega_grid.size() < 2) throw InsufficientPoints("omega grid needs at least two points");
    const auto [lo, hi] = std::minmax_element(omega_grid.begin(), omega_grid.end());
    if (!(*lo > 0.0) || *hi / *lo < 100.0 * (1.0 - 1e-12)) {
        throw InvalidArgument("omega grid must span at least two decades");
    }
    SymbolProbe probe;
    probe.n = n;
    std::vector<double> xs, ys;
    std::int64_t last_k = -1;
    for (double target : omega_grid) {
        const std::int64_t k = std::max<std::int64_t>(mode_for_frequency(model, m, target, t0), m > 0.0 ? 0 : 1);
        if (k == last_k) continue;
        last_k = k;
        const FrequencyLadder ladder = frequency_ladder(model, k, m, n + 1, t0, action);
        const LevelDifference d = level_difference(ladder, n, n + 1);
        probe.samples.push_back({k, std::sqrt(ladder.omega_sq), d.omega_sq});
        xs.push_back(std::sqrt(ladder.omega_sq));
        ys.push_back(std::abs(d.omega_sq));
    }
    for (double y : ys) {
        if (!(y > 1e-300)) throw DegenerateFit("frequency increment vanishes (static background?)");
    }
    probe.fit = fit_log_log(xs, ys);
    return probe;
}

}  // namespace adiavac
