#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "adiavac/adiabatic.hpp"
#include "adiavac/background.hpp"
#include "adiavac/dop853.hpp"
#include "adiavac/errors.hpp"

namespace adiavac {

using cplx = std::complex<double>;

/// Mode-function data (W, W') on the Cauchy surface t = t0.
struct ModeInitialData {
    std::int64_t k = 0;
    double t0 = 0.0;
    cplx W;
    cplx Wdot;
};

/// a^3 (W conj(W') - conj(W) W'); equals i for a normalized mode.
inline cplx wronskian(double a_cubed, cplx W, cplx Wdot) {
    return a_cubed * (W * std::conj(Wdot) - std::conj(W) * Wdot);
}

inline cplx wronskian(const ScaleFactorModel& model, const ModeInitialData& d) {
    const double a = model.value(d.t0);
    return wronskian(a * a * a, d.W, d.Wdot);
}

/// W = (2 a^3 Omega)^(-1/2) with real positive phase, W' = (r - i Omega) W.
inline ModeInitialData initial_data_from_multipliers(const ScaleFactorModel& model, std::int64_t k, double t0,
                                                     const RJMultipliers& rj) {
    const double a = model.value(t0);
    const double w = 1.0 / std::sqrt(2.0 * a * a * a * rj.omega);
    return ModeInitialData{k, t0, cplx(w, 0.0), cplx(rj.r, -rj.omega) * w};
}

inline ModeInitialData adiabatic_initial_data(const ScaleFactorModel& model, std::int64_t k, double m, int n, double t0,
                                              const PositivityAction& action = {}) {
    return initial_data_from_multipliers(model, k, t0, rj_multipliers(model, k, m, n, t0, action));
}

struct ModeSolverOptions {
    double tol = 1e-10;  ///< relative and absolute local error bound
    /// Step-size cap: at least this many steps per period of omega_k at its
    /// largest value over the span. Zero disables the cap.
    double min_steps_per_period = 20.0;
    /// Largest admissible Wronskian drift; exceeding it is ToleranceNotMet.
    double wronskian_tolerance = 1e-6;
    long max_steps = 50'000'000;
};

struct ModeSample {
    double t = 0.0;
    cplx W;
    cplx Wdot;
    double wronskian_drift = 0.0;
};

struct ModeSolverStats {
    long steps = 0;
    long rejected = 0;
    long rhs_evaluations = 0;
    double max_wronskian_drift = 0.0;
};

struct ModeTrajectory {
    std::int64_t k = 0;
    std::vector<ModeSample> samples;  ///< strictly increasing in t
    ModeSolverStats stats;

    ModeInitialData data_at(std::size_t i) const { return {k, samples.at(i).t, samples.at(i).W, samples.at(i).Wdot}; }
};

namespace detail {

inline double max_omega_over(const ScaleFactorModel& model, std::int64_t k, double m, double t_lo, double t_hi) {
    double a_min = model.value(t_lo);
    constexpr int probes = 256;
    for (int i = 1; i <= probes; ++i) {
        a_min = std::min(a_min, model.value(t_lo + (t_hi - t_lo) * i / probes));
    }
    return std::sqrt(ModeChannel{k}.eigenvalue() / (a_min * a_min) + m * m);
}

}  // namespace detail

inline constexpr double local_tolerance_factor = 0.1;

/// Integrates W'' + 3 (a'/a) W' + omega_k^2 W = 0 from data.t0 across
/// [t_lo, t_hi] (which must contain data.t0).
///
/// With empty `sample_times`, every accepted step is recorded; otherwise
/// exactly the requested times (sorted, inside the span) are, via dense
/// output.
inline ModeTrajectory solve_mode(const ScaleFactorModel& model, double m, const ModeInitialData& data, double t_lo,
                                 double t_hi, const ModeSolverOptions& opts = {},
                                 std::span<const double> sample_times = {}) {
    if (!(t_lo <= data.t0 && data.t0 <= t_hi)) throw InvalidArgument("time span must contain the Cauchy time");
    if (!(opts.tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");
    if (!std::is_sorted(sample_times.begin(), sample_times.end())) {
        throw InvalidArgument("sample times must be sorted");
    }
    for (double t : sample_times) {
        if (t < t_lo || t > t_hi) throw InvalidArgument("sample time outside span");
    }
    check_mass(data.k, m);
    const double lambda = ModeChannel{data.k}.eigenvalue();
    const double m2 = m * m;

    Dop853Options dopts;
    // tol bounds the global error over tens of periods; steps run tighter
    dopts.rtol = opts.tol * local_tolerance_factor;
    dopts.atol = opts.tol * local_tolerance_factor;
    dopts.max_steps = opts.max_steps;
    if (opts.min_steps_per_period > 0.0 && t_hi > t_lo) {
        const double w_max = detail::max_omega_over(model, data.k, m, t_lo, t_hi);
        dopts.h_max = 2.0 * std::numbers::pi / (opts.min_steps_per_period * w_max);
    }

    using Solver = Dop853<4>;
    using State = Solver::State;
    auto rhs = [&](double t, const State& y, State& dy) {
        const auto [a, adot] = model.value_and_rate(t);
        const double friction = 3.0 * adot / a;
        const double w2 = lambda / (a * a) + m2;
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -friction * y[2] - w2 * y[0];
        dy[3] = -friction * y[3] - w2 * y[1];
    };

    const cplx wr0 = wronskian(model, data);
    const double wr_scale = std::abs(wr0) > 0.0 ? std::abs(wr0) : 1.0;
    auto drift_of = [&](double t, cplx W, cplx Wdot) {
        const double a = model.value(t);
        return std::abs(wronskian(a * a * a, W, Wdot) - wr0) / wr_scale;
    };

    ModeTrajectory traj;
    traj.k = data.k;
    const bool every_step = sample_times.empty();
    std::vector<ModeSample> backward, forward;

    auto run = [&](double t_end, std::span<const double> wanted, std::vector<ModeSample>& out, bool descending) {
        State y{data.W.real(), data.W.imag(), data.Wdot.real(), data.Wdot.imag()};
        std::size_t next = 0;  // index into wanted in integration order
        auto pending = [&](std::size_t i) { return descending ? wanted[wanted.size() - 1 - i] : wanted[i]; };
        auto wants_dense = [&](double lo, double hi) {
            if (every_step || next >= wanted.size()) return false;
            const double t = pending(next);
            return t >= lo && t <= hi;
        };
        auto observer = [&](const Solver::DenseStep& step, double t, const State& s) {
            const double drift = drift_of(t, {s[0], s[1]}, {s[2], s[3]});
            traj.stats.max_wronskian_drift = std::max(traj.stats.max_wronskian_drift, drift);
            if (every_step) {
                out.push_back({t, {s[0], s[1]}, {s[2], s[3]}, drift});
                return;
            }
            const double lo = std::min(step.t_begin(), step.t_end()), hi = std::max(step.t_begin(), step.t_end());
            while (next < wanted.size() && pending(next) >= lo && pending(next) <= hi) {
                const double ts = pending(next);
                const State v = ts == t ? s : step(ts);
                const cplx W(v[0], v[1]), Wd(v[2], v[3]);
                const double d = drift_of(ts, W, Wd);
                traj.stats.max_wronskian_drift = std::max(traj.stats.max_wronskian_drift, d);
                out.push_back({ts, W, Wd, d});
                ++next;
            }
        };
        Solver solver(dopts);
        const Dop853Stats st = solver.integrate(rhs, data.t0, y, t_end, wants_dense, observer);
        traj.stats.steps += st.steps;
        traj.stats.rejected += st.rejected;
        traj.stats.rhs_evaluations += st.rhs_evaluations;
        if (!every_step && next != wanted.size()) {
            throw ToleranceNotMet("integration ended before all samples were produced");
        }
    };

    // samples strictly before, at, and strictly after t0
    const auto first_at = std::lower_bound(sample_times.begin(), sample_times.end(), data.t0);
    const auto first_after = std::upper_bound(sample_times.begin(), sample_times.end(), data.t0);
    const std::span<const double> before(sample_times.begin(), first_at);
    const std::span<const double> after(first_after, sample_times.end());

    if (t_lo < data.t0 && (every_step || !before.empty())) {
        run(every_step ? t_lo : before.front(), before, backward, true);
    }
    std::reverse(backward.begin(), backward.end());
    traj.samples = std::move(backward);
    if (every_step || first_at != first_after) {
        traj.samples.push_back({data.t0, data.W, data.Wdot, 0.0});
    }
    if (t_hi > data.t0 && (every_step || !after.empty())) {
        run(every_step ? t_hi : after.back(), after, forward, false);
    }
    traj.samples.insert(traj.samples.end(), forward.begin(), forward.end());

    if (traj.stats.max_wronskian_drift > opts.wronskian_tolerance) {
        throw ToleranceNotMet("Wronskian drift " + std::to_string(traj.stats.max_wronskian_drift) +
                              " exceeds tolerance");
    }
    return traj;
}

}  // namespace adiavac
