#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adiavac/adiabatic.hpp"
#include "adiavac/background.hpp"
#include "adiavac/modes.hpp"
#include "adiavac/numeric.hpp"
#include "adiavac/parallel.hpp"

namespace adiavac {

/// Switching function chi of the detector coupling, supported on
/// [tau_a, tau_b] with sup |chi| = 1.
struct WindowFunction {
    enum class Kind { smooth_bump, gaussian_truncated };
    Kind kind = Kind::smooth_bump;
    double tau_a = -1.0;
    double tau_b = 1.0;
    /// gaussian_truncated: standard deviation in units of the half-width.
    double width = 0.25;

    static WindowFunction smooth_bump(double a, double b) { return {Kind::smooth_bump, a, b, 0.25}; }
    static WindowFunction gaussian_truncated(double a, double b, double width) {
        return {Kind::gaussian_truncated, a, b, width};
    }

    double center() const noexcept { return 0.5 * (tau_a + tau_b); }
    double half_width() const noexcept { return 0.5 * (tau_b - tau_a); }

    double operator()(double tau) const noexcept {
        const double x = (tau - center()) / half_width();
        if (!(std::abs(x) < 1.0)) return 0.0;
        if (kind == Kind::smooth_bump) return std::exp(1.0 - 1.0 / (1.0 - x * x));
        return std::exp(-0.5 * x * x / (width * width));
    }

    WindowFunction shifted(double c) const { return {kind, tau_a + c, tau_b + c, width}; }

    std::string kind_name() const { return kind == Kind::smooth_bump ? "smooth_bump" : "gaussian_truncated"; }
};

struct DetectorOptions {
    ModeSolverOptions solver{1e-12, 20.0, 1e-6};
    /// Quadrature nodes per period of exp(-i E tau) W_k(tau) at its fastest.
    double points_per_period = 12.0;
    /// Floor on quadrature intervals so the window itself is resolved.
    std::size_t min_intervals = 4096;
    PositivityAction positivity;
    /// Upper-half-of-K share of F(E) below which the value counts as
    /// converged in K.
    double convergence_fraction = 0.01;
};

struct ResponseCurve {
    int order = 0;
    std::int64_t cutoff = 0;
    std::vector<double> energies;
    std::vector<double> values;             ///< F(E_i) >= 0
    std::vector<double> upper_half_share;   ///< share of F(E_i) from k > K/2
    std::vector<bool> converged;            ///< upper_half_share below threshold
    std::vector<double> quadrature_error;   ///< |F_h - F_2h| / F_h
    double min_cutoff_frequency = 0.0;      ///< min over window of omega_K
    bool cutoff_adequate = false;
};

namespace detail {

inline double a_extreme(const ScaleFactorModel& model, double lo, double hi, bool want_max) {
    double v = model.value(lo);
    constexpr int probes = 512;
    for (int i = 1; i <= probes; ++i) {
        const double a = model.value(lo + (hi - lo) * i / probes);
        v = want_max ? std::max(v, a) : std::min(v, a);
    }
    return v;
}

}  // namespace detail

/// F(E) = sum_{k<=K} (k+1)^2/(2 pi^2) |int chi(tau) e^{-i E tau} W_k(tau) dtau|^2
/// for a comoving detector, W_k solved from order-n adiabatic data at t0.
///
/// The tau integral is a trapezoid sum on a uniform grid, which converges
/// faster than any power for a smooth compactly supported integrand; a
/// second sum on every other node gives the per-mode Richardson check.
inline ResponseCurve detector_response(const ScaleFactorModel& model, double m, int n, double t0,
                                       const WindowFunction& window, std::span<const double> energies,
                                       std::int64_t cutoff, const DetectorOptions& opts = {}) {
    if (energies.empty()) throw InvalidArgument("empty energy grid");
    for (double e : energies) {
        if (!(e > 0.0) || !std::isfinite(e)) throw InvalidArgument("energies must be positive");
    }
    if (!(window.tau_b > window.tau_a)) throw InvalidArgument("window support is empty");
    if (cutoff < 0) throw InvalidArgument("negative mode cutoff");
    const double e_max = *std::max_element(energies.begin(), energies.end());

    ResponseCurve curve;
    curve.order = n;
    curve.cutoff = cutoff;
    curve.energies.assign(energies.begin(), energies.end());
    const double a_max = detail::a_extreme(model, window.tau_a, window.tau_b, true);
    const double a_min = detail::a_extreme(model, window.tau_a, window.tau_b, false);
    curve.min_cutoff_frequency = std::sqrt(ModeChannel{cutoff}.eigenvalue() / (a_max * a_max) + m * m);
    if (!(curve.min_cutoff_frequency > e_max)) {
        throw CutoffInadequate("omega_K = " + std::to_string(curve.min_cutoff_frequency) +
                               " does not exceed max E = " + std::to_string(e_max));
    }
    curve.cutoff_adequate = true;

    const std::size_t n_modes = static_cast<std::size_t>(cutoff) + 1;
    const std::size_t n_e = energies.size();
    // |I_h|^2 and |I_2h|^2 per mode and energy
    std::vector<double> fine(n_modes * n_e), coarse(n_modes * n_e);
    const double span = window.tau_b - window.tau_a;
    const double t_lo = std::min(window.tau_a, t0), t_hi = std::max(window.tau_b, t0);

    parallel_for(n_modes, [&](std::size_t idx) {
        const auto k = static_cast<std::int64_t>(idx);
        const double w_max = std::sqrt(ModeChannel{k}.eigenvalue() / (a_min * a_min) + m * m);
        const double nu = e_max + w_max;
        auto intervals = static_cast<std::size_t>(std::ceil(span * opts.points_per_period * nu / (2.0 * std::numbers::pi)));
        intervals = std::max<std::size_t>(intervals + (intervals % 2), opts.min_intervals + (opts.min_intervals % 2));
        const double h = span / static_cast<double>(intervals);
        std::vector<double> grid(intervals + 1);
        for (std::size_t j = 0; j <= intervals; ++j) grid[j] = window.tau_a + h * static_cast<double>(j);
        grid.back() = window.tau_b;

        const ModeInitialData data = adiabatic_initial_data(model, k, m, n, t0, opts.positivity);
        const ModeTrajectory traj = solve_mode(model, m, data, t_lo, t_hi, opts.solver, grid);
        // samples may include t0 when it is not a grid node; keep grid nodes only
        std::vector<cplx> weighted(intervals + 1);
        std::size_t j = 0;
        for (const auto& s : traj.samples) {
            if (j <= intervals && s.t == grid[j]) {
                const double end_weight = (j == 0 || j == intervals) ? 0.5 : 1.0;
                weighted[j] = end_weight * window(s.t) * s.W;
                ++j;
            }
        }
        if (j != intervals + 1) throw ToleranceNotMet("missing quadrature samples for mode " + std::to_string(k));

        for (std::size_t e = 0; e < n_e; ++e) {
            const double energy = energies[e];
            cplx sum_all, sum_even;
            // exact phase every 128 nodes, rotation in between
            const cplx step = std::polar(1.0, -energy * h);
            cplx phase;
            for (std::size_t q = 0; q <= intervals; ++q) {
                if (q % 128 == 0) phase = std::polar(1.0, -energy * grid[q]);
                const cplx term = phase * weighted[q];
                sum_all += term;
                if (q % 2 == 0) {
                    // coarse trapezoid: interior even nodes weight 2h, ends h
                    sum_even += (q == 0 || q == intervals) ? term : 2.0 * term;
                }
                phase *= step;
            }
            fine[idx * n_e + e] = std::norm(h * sum_all);
            coarse[idx * n_e + e] = std::norm(h * sum_even);
        }
    });

    const double inv_volume = 1.0 / (2.0 * std::numbers::pi * std::numbers::pi);
    const auto half = static_cast<std::size_t>(cutoff / 2);
    for (std::size_t e = 0; e < n_e; ++e) {
        CompensatedSum total, total_coarse, upper;
        for (std::size_t idx = 0; idx < n_modes; ++idx) {
            const double w = ModeChannel{static_cast<std::int64_t>(idx)}.degeneracy() * inv_volume;
            total += w * fine[idx * n_e + e];
            total_coarse += w * coarse[idx * n_e + e];
            if (idx > half) upper += w * fine[idx * n_e + e];
        }
        const double f = total.value();
        curve.values.push_back(f);
        const double share = f > 0.0 ? upper.value() / f : 0.0;
        curve.upper_half_share.push_back(share);
        curve.converged.push_back(share < opts.convergence_fraction);
        curve.quadrature_error.push_back(f > 0.0 ? std::abs(f - total_coarse.value()) / f : 0.0);
    }
    return curve;
}

/// Least-squares slope of log F against log E over [e_lo, e_hi].
inline LogLogFit slope_fit(const ResponseCurve& curve, double e_lo, double e_hi) {
    if (!curve.cutoff_adequate) throw CutoffInadequate("curve was computed with an inadequate cutoff");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < curve.energies.size(); ++i) {
        if (curve.energies[i] >= e_lo && curve.energies[i] <= e_hi) {
            xs.push_back(curve.energies[i]);
            ys.push_back(curve.values[i]);
        }
    }
    if (xs.size() < 8) {
        throw InsufficientPoints(std::to_string(xs.size()) + " energies in fit window, need 8");
    }
    return fit_log_log(xs, ys);
}

/// [N - 3/2] := max{j in N0 : j < N - 3/2}; empty when N <= 3/2.
inline std::optional<int> bracket_exponent(double microlocal_order) {
    const double x = microlocal_order - 1.5;
    if (!(x > 0.0)) return std::nullopt;
    int j = static_cast<int>(std::ceil(x)) - 1;
    return std::max(j, 0);
}

}  // namespace adiavac
