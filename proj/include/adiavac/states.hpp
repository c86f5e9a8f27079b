#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "adiavac/adiabatic.hpp"
#include "adiavac/background.hpp"
#include "adiavac/modes.hpp"
#include "adiavac/numeric.hpp"

namespace adiavac {

using Matrix2 = std::array<std::array<cplx, 2>, 2>;

/// Per-mode phase-space vector F = (q, p).
struct PhasePoint {
    cplx q;
    cplx p;
};

/// Pure quasifree state restricted to one mode, fixed by the multipliers
/// (r, Omega) of R and J. Coordinates are ordered (q, p).
struct ModeQuasifreeState {
    std::int64_t k = 0;
    double t0 = 0.0;
    double r = 0.0;
    double omega = 1.0;

    static ModeQuasifreeState from(const RJMultipliers& rj, std::int64_t k, double t0) {
        if (!(rj.omega > 0.0)) throw InvalidArgument("Omega must be positive");
        return {k, t0, rj.r, rj.omega};
    }

    /// k(q, p) = (2 Omega)^(-1/2) ((r - i Omega) q - p)
    cplx one_particle(const PhasePoint& f) const {
        return (cplx(r, -omega) * f.q - f.p) / std::sqrt(2.0 * omega);
    }

    /// <kF1, kF2>, antilinear in the first slot.
    cplx lambda(const PhasePoint& f1, const PhasePoint& f2) const {
        return std::conj(one_particle(f1)) * one_particle(f2);
    }
    double mu(const PhasePoint& f1, const PhasePoint& f2) const { return lambda(f1, f2).real(); }
    double sigma(const PhasePoint& f1, const PhasePoint& f2) const { return 2.0 * lambda(f1, f2).imag(); }

    Matrix2 lambda_matrix() const {
        const PhasePoint e[2] = {{1.0, 0.0}, {0.0, 1.0}};
        Matrix2 m{};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) m[i][j] = lambda(e[i], e[j]);
        return m;
    }
    Matrix2 mu_matrix() const {
        Matrix2 m = lambda_matrix();
        for (auto& row : m)
            for (auto& v : row) v = v.real();
        return m;
    }
    Matrix2 sigma_matrix() const {
        Matrix2 m = lambda_matrix();
        for (auto& row : m)
            for (auto& v : row) v = 2.0 * v.imag();
        return m;
    }
};

/// The fixed per-mode symplectic matrix: sigma(F1, F2) = -q1 p2 + p1 q2.
inline Matrix2 symplectic_matrix() { return {{{0.0, -1.0}, {1.0, 0.0}}}; }

/// The same one-particle vector built from a normalized mode function:
/// a^(3/2) (q W' - p W). Agrees with ModeQuasifreeState::one_particle up
/// to the mode's phase.
inline cplx one_particle_from_mode(double a, cplx W, cplx Wdot, const PhasePoint& f) {
    return std::pow(a, 1.5) * (f.q * Wdot - f.p * W);
}

inline Matrix2 lambda_from_mode(double a, cplx W, cplx Wdot) {
    const PhasePoint e[2] = {{1.0, 0.0}, {0.0, 1.0}};
    Matrix2 m{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            m[i][j] = std::conj(one_particle_from_mode(a, W, Wdot, e[i])) * one_particle_from_mode(a, W, Wdot, e[j]);
    return m;
}

inline Matrix2 multiply(const Matrix2& x, const Matrix2& y) {
    Matrix2 z{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) z[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
    return z;
}

inline double frobenius_distance(const Matrix2& x, const Matrix2& y) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s += std::norm(x[i][j] - y[i][j]);
    return std::sqrt(s);
}

/// Eigenvalues of a Hermitian 2x2 matrix, ascending.
inline std::pair<double, double> hermitian_eigenvalues(const Matrix2& m) {
    const double a = m[0][0].real(), d = m[1][1].real();
    const double mean = 0.5 * (a + d);
    const double rad = std::hypot(0.5 * (a - d), std::abs(m[0][1]));
    return {mean - rad, mean + rad};
}

/// S = 1/2 [[i J^-1 R + 1, -i J^-1], [i R J^-1 R + i J, -i R J^-1 + 1]]
/// with scalar R = r, J = Omega.
inline Matrix2 purity_matrix(double r, double omega) {
    const cplx i(0.0, 1.0);
    return {{{0.5 * (i * r / omega + 1.0), 0.5 * (-i / omega)},
             {0.5 * (i * r * r / omega + i * omega), 0.5 * (-i * r / omega + 1.0)}}};
}

/// Frobenius norm of S^2 - S; zero for a pure state.
inline double purity_check(const ModeQuasifreeState& state) {
    if (!(state.omega > 0.0)) throw InvalidArgument("Omega must be positive");
    const Matrix2 s = purity_matrix(state.r, state.omega);
    return frobenius_distance(multiply(s, s), s);
}

/// Per-mode coefficients of isotropic data: every one of the (k+1)^2
/// degenerate harmonics at level k carries (q, p).
struct ModeCoefficients {
    std::int64_t k = 0;
    cplx q;
    cplx p;
};

struct SobolevNorms {
    double q = 0.0;  ///< sum_k deg(k) (1+k^2)^s |q_k|^2
    double p = 0.0;  ///< same for p_k
};

inline SobolevNorms sobolev_mode_norm(std::span<const ModeCoefficients> data, double s) {
    CompensatedSum nq, np;
    for (const auto& c : data) {
        const double kk = static_cast<double>(c.k);
        const double w = ModeChannel{c.k}.degeneracy() * std::pow(1.0 + kk * kk, s);
        nq += w * std::norm(c.q);
        np += w * std::norm(c.p);
    }
    return {nq.value(), np.value()};
}

/// ||q||^2_{H^{1/2}} + ||p||^2_{H^{-1/2}}
inline double energy_norm(std::span<const ModeCoefficients> data) {
    return sobolev_mode_norm(data, 0.5).q + sobolev_mode_norm(data, -0.5).p;
}

/// mu_N(F, F) = sum_k deg(k) mu_k((q_k, p_k), (q_k, p_k)).
/// `state_of(k)` supplies the per-mode state; k not in data is zero.
inline double mu_norm(std::span<const ModeCoefficients> data,
                      const std::function<ModeQuasifreeState(std::int64_t)>& state_of) {
    CompensatedSum acc;
    for (const auto& c : data) {
        const ModeQuasifreeState st = state_of(c.k);
        const PhasePoint f{c.q, c.p};
        acc += ModeChannel{c.k}.degeneracy() * st.mu(f, f);
    }
    return acc.value();
}

struct RatioExtremes {
    double min = 0.0;
    double max = 0.0;
    std::size_t samples = 0;
};

/// Ratio mu_N(F, F) / (||q||^2_{1/2} + ||p||^2_{-1/2}) over a random ensemble
/// of real band-limited data on modes 0..k_max.
///
/// Each sample draws a random support of up to `modes_per_sample` levels and
/// Gaussian coefficients; single-level samples are included so the
/// per-mode extremes are reachable.
inline RatioExtremes mu_sobolev_ratio(std::span<const ModeQuasifreeState> states, std::size_t ensemble_size,
                                      std::uint64_t seed, std::size_t modes_per_sample = 8) {
    if (states.empty()) throw InvalidArgument("need at least one mode state");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, states.size() - 1);
    std::uniform_int_distribution<std::size_t> count(1, std::max<std::size_t>(1, modes_per_sample));
    RatioExtremes ex{std::numeric_limits<double>::infinity(), 0.0, 0};
    std::vector<ModeCoefficients> data;
    std::vector<std::size_t> owner;
    for (std::size_t s = 0; s < ensemble_size; ++s) {
        data.clear();
        owner.clear();
        const std::size_t levels = count(rng);
        for (std::size_t j = 0; j < levels; ++j) {
            const std::size_t i = pick(rng);
            data.push_back({states[i].k, gauss(rng), gauss(rng)});
            owner.push_back(i);
        }
        CompensatedSum mu;
        for (std::size_t j = 0; j < data.size(); ++j) {
            const PhasePoint f{data[j].q, data[j].p};
            mu += ModeChannel{data[j].k}.degeneracy() * states[owner[j]].mu(f, f);
        }
        const double ratio = mu.value() / energy_norm(data);
        ex.min = std::min(ex.min, ratio);
        ex.max = std::max(ex.max, ratio);
        ++ex.samples;
    }
    return ex;
}

/// Exact per-mode bounds of the same ratio: generalized eigenvalues of the
/// mu matrix against diag((1+k^2)^(1/2), (1+k^2)^(-1/2)).
inline std::pair<double, double> mode_ratio_bounds(const ModeQuasifreeState& st) {
    const double kk = static_cast<double>(st.k);
    const double w = std::sqrt(1.0 + kk * kk);
    const Matrix2 mu = st.mu_matrix();
    // D^{-1/2} mu D^{-1/2}
    Matrix2 scaled{};
    const double d[2] = {1.0 / std::sqrt(w), std::sqrt(w)};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) scaled[i][j] = mu[i][j] * d[i] * d[j];
    return hermitian_eigenvalues(scaled);
}

}  // namespace adiavac
