#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adiavac/adiabatic.hpp"
#include "adiavac/background.hpp"
#include "adiavac/modes.hpp"
#include "adiavac/numeric.hpp"
#include "adiavac/parallel.hpp"

namespace adiavac {

/// W = alpha V + beta conj(V) for one mode.
struct BogoliubovPair {
    std::int64_t k = 0;
    cplx alpha;
    cplx beta;

    /// | |alpha|^2 - |beta|^2 - 1 |
    double unitarity_defect() const { return std::abs(std::norm(alpha) - std::norm(beta) - 1.0); }
};

/// <f, g> = i a^3 (conj(f) g' - conj(f') g)
inline cplx klein_gordon_bracket(double a_cubed, cplx f, cplx fdot, cplx g, cplx gdot) {
    return cplx(0.0, 1.0) * a_cubed * (std::conj(f) * gdot - std::conj(fdot) * g);
}

/// Coefficients of W in the basis (V, conj V); both must be
/// Wronskian-normalized at the common time.
inline BogoliubovPair bogoliubov_from_modes(const ModeInitialData& V, const ModeInitialData& W, double a_cubed,
                                            double normalization_tolerance = 1e-8) {
    const cplx i(0.0, 1.0);
    if (std::abs(wronskian(a_cubed, V.W, V.Wdot) - i) > normalization_tolerance ||
        std::abs(wronskian(a_cubed, W.W, W.Wdot) - i) > normalization_tolerance) {
        throw NotNormalized("mode k=" + std::to_string(W.k) + " is not Wronskian-normalized");
    }
    BogoliubovPair pair;
    pair.k = W.k;
    pair.alpha = klein_gordon_bracket(a_cubed, V.W, V.Wdot, W.W, W.Wdot);
    pair.beta = -klein_gordon_bracket(a_cubed, std::conj(V.W), std::conj(V.Wdot), W.W, W.Wdot);
    return pair;
}

/// Same coefficients for two adiabatic states at one Cauchy time, written
/// in terms of the multiplier differences so that |beta| keeps full
/// relative precision when it is far below 1:
///   alpha = ((Omega1 + Omega2) + i dr) / (2 sqrt(Omega1 Omega2))
///   beta  = (-dOmega - i dr)         / (2 sqrt(Omega1 Omega2))
inline BogoliubovPair bogoliubov_from_multipliers(std::int64_t k, const RJMultipliers& first,
                                                  const RJMultipliers& second, const LevelDifference& diff) {
    const double norm = 2.0 * std::sqrt(first.omega * second.omega);
    BogoliubovPair pair;
    pair.k = k;
    pair.alpha = cplx(first.omega + second.omega, diff.r) / norm;
    pair.beta = cplx(-diff.omega, -diff.r) / norm;
    return pair;
}

/// Pair between the order-n1 and order-n2 adiabatic states of one mode.
inline BogoliubovPair bogoliubov_between_orders(const ScaleFactorModel& model, std::int64_t k, double m, int n1,
                                                int n2, double t0, const PositivityAction& action = {}) {
    const int lo = std::min(n1, n2), hi = std::max(n1, n2);
    const FrequencyLadder ladder = frequency_ladder(model, k, m, hi, t0, action);
    LevelDifference diff = level_difference(ladder, lo, hi);
    if (n1 > n2) {
        diff.omega = -diff.omega;
        diff.omega_sq = -diff.omega_sq;
        diff.r = -diff.r;
    }
    return bogoliubov_from_multipliers(k, rj_from_ladder(ladder, n1), rj_from_ladder(ladder, n2), diff);
}

enum class TraceVerdict { converging, diverging, inconclusive };

inline std::string to_string(TraceVerdict v) {
    switch (v) {
        case TraceVerdict::converging: return "converging";
        case TraceVerdict::diverging: return "diverging";
        case TraceVerdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

/// Verdict bands around the critical exponent 3/2.
inline TraceVerdict verdict_for_exponent(double p) {
    if (p > 1.6) return TraceVerdict::converging;
    if (p < 1.4) return TraceVerdict::diverging;
    return TraceVerdict::inconclusive;
}

struct TraceDiagnostics {
    std::int64_t cutoff = 0;
    std::vector<BogoliubovPair> pairs;
    std::vector<double> partial_sums;  ///< S(K) = sum_{k<=K} (k+1)^2 |beta_k|^2, one per pair
    std::optional<LogLogFit> fit;      ///< of |beta_k| against k; slope = -p
    bool degenerate_fit = false;       ///< every |beta_k| below 1e-14
    TraceVerdict verdict = TraceVerdict::inconclusive;

    double decay_exponent() const { return fit ? -fit->slope : std::numeric_limits<double>::infinity(); }
    double max_unitarity_defect() const {
        double d = 0.0;
        for (const auto& p : pairs) d = std::max(d, p.unitarity_defect());
        return d;
    }
};

/// Fits log|beta_k| against log k over the upper half of the scanned range
/// and reads off the trace-class verdict.
inline TraceDiagnostics trace_diagnostics(std::vector<BogoliubovPair> pairs) {
    TraceDiagnostics diag;
    if (pairs.empty()) throw InvalidArgument("no Bogoliubov pairs to diagnose");
    diag.cutoff = pairs.back().k;
    CompensatedSum s;
    bool all_small = true;
    for (const auto& p : pairs) {
        const double b2 = std::norm(p.beta);
        s += ModeChannel{p.k}.degeneracy() * b2;
        diag.partial_sums.push_back(s.value());
        if (std::abs(p.beta) >= 1e-14) all_small = false;
    }
    if (all_small) {
        diag.degenerate_fit = true;
        diag.verdict = TraceVerdict::converging;
    } else {
        const double k_mid = 0.5 * static_cast<double>(pairs.front().k + pairs.back().k);
        std::vector<double> xs, ys;
        for (const auto& p : pairs) {
            if (static_cast<double>(p.k) >= k_mid && p.k > 0) {
                xs.push_back(static_cast<double>(p.k));
                ys.push_back(std::abs(p.beta));
            }
        }
        diag.fit = fit_log_log(xs, ys);
        diag.verdict = verdict_for_exponent(-diag.fit->slope);
    }
    diag.pairs = std::move(pairs);
    return diag;
}

/// Per-mode beta between the order-n1 and order-n2 states at the same t0
/// for k in [k_lo, k_hi].
inline TraceDiagnostics order_vs_order_scan(const ScaleFactorModel& model, double m, int n1, int n2, double t0,
                                            std::int64_t k_lo, std::int64_t k_hi,
                                            const PositivityAction& action = {}) {
    if (k_lo < 0 || k_hi < k_lo) throw InvalidArgument("invalid k range");
    std::vector<BogoliubovPair> pairs(static_cast<std::size_t>(k_hi - k_lo + 1));
    parallel_for(pairs.size(), [&](std::size_t i) {
        pairs[i] = bogoliubov_between_orders(model, k_lo + static_cast<std::int64_t>(i), m, n1, n2, t0, action);
    });
    return trace_diagnostics(std::move(pairs));
}

struct ParticleNumber {
    std::int64_t k = 0;
    double number = 0.0;  ///< N_k = |beta_k|^2
    BogoliubovPair pair;
};

struct ParticleSpectrum {
    std::vector<ParticleNumber> modes;
    std::vector<double> cumulative_density;  ///< sum_{k' <= k} (k'+1)^2 N_k'
    /// Share of the total density carried by the upper half of the k range.
    double upper_half_fraction = 0.0;
    std::optional<LogLogFit> fit;  ///< of N_k against k, upper half of range

    double total_density() const { return cumulative_density.empty() ? 0.0 : cumulative_density.back(); }
};

/// Evolves the order-n state prepared at t0 to t1 and compares it with the
/// order-n state prepared at t1.
inline ParticleSpectrum particle_number_evolution(const ScaleFactorModel& model, double m, int n, double t0, double t1,
                                                  std::int64_t k_lo, std::int64_t k_hi,
                                                  const ModeSolverOptions& solver = {},
                                                  const PositivityAction& action = {}) {
    if (!(t1 >= t0)) throw InvalidArgument("t1 must not precede t0");
    if (k_lo < 0 || k_hi < k_lo) throw InvalidArgument("invalid k range");
    ParticleSpectrum spec;
    spec.modes.resize(static_cast<std::size_t>(k_hi - k_lo + 1));
    const double a1 = model.value(t1);
    const double a1_cubed = a1 * a1 * a1;
    const std::vector<double> at_t1{t1};
    parallel_for(spec.modes.size(), [&](std::size_t i) {
        const std::int64_t k = k_lo + static_cast<std::int64_t>(i);
        const ModeInitialData start = adiabatic_initial_data(model, k, m, n, t0, action);
        const ModeTrajectory traj = solve_mode(model, m, start, t0, t1, solver, at_t1);
        const ModeInitialData transported = traj.data_at(traj.samples.size() - 1);
        const ModeInitialData fresh = adiabatic_initial_data(model, k, m, n, t1, action);
        const BogoliubovPair pair = bogoliubov_from_modes(fresh, transported, a1_cubed);
        spec.modes[i] = {k, std::norm(pair.beta), pair};
    });
    CompensatedSum total, upper;
    const double k_mid = 0.5 * static_cast<double>(k_lo + k_hi);
    std::vector<double> xs, ys;
    for (const auto& pn : spec.modes) {
        const double w = ModeChannel{pn.k}.degeneracy() * pn.number;
        total += w;
        spec.cumulative_density.push_back(total.value());
        if (static_cast<double>(pn.k) >= k_mid) {
            upper += w;
            if (pn.k > 0 && pn.number > 0.0) {
                xs.push_back(static_cast<double>(pn.k));
                ys.push_back(pn.number);
            }
        }
    }
    spec.upper_half_fraction = total.value() > 0.0 ? upper.value() / total.value() : 0.0;
    if (xs.size() >= 2 && xs.size() * 2 >= static_cast<std::size_t>(k_hi - k_lo + 1) / 2) {
        spec.fit = fit_log_log(xs, ys);
    }
    return spec;
}

}  // namespace adiavac
