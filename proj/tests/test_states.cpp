#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "adiavac/states.hpp"

using namespace adiavac;

namespace {

std::vector<ModeQuasifreeState> random_states(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ur(-10.0, 10.0), ul(std::log(0.1), std::log(100.0));
    std::vector<ModeQuasifreeState> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back({static_cast<std::int64_t>(i), 0.0, ur(rng), std::exp(ul(rng))});
    return out;
}

double max_abs_diff(const Matrix2& x, const Matrix2& y) { return frobenius_distance(x, y); }

}  // namespace

TEST(ModeState, OneParticleVectorForUnitFrequency) {
    const ModeQuasifreeState st{0, 0.0, 0.0, 1.0};
    const cplx v = st.one_particle({1.0, 0.0});
    EXPECT_NEAR(v.real(), 0.0, 1e-16);
    EXPECT_NEAR(v.imag(), -1.0 / std::sqrt(2.0), 1e-16);
    EXPECT_NEAR(std::abs(v), 1.0 / std::sqrt(2.0), 1e-16);
}

TEST(ModeState, SigmaIsTheSymplecticForm) {
    for (const auto& st : random_states(200, 1)) {
        EXPECT_LT(max_abs_diff(st.sigma_matrix(), symplectic_matrix()), 1e-12);
    }
}

TEST(ModeState, MuMatrixClosedForm) {
    for (const auto& st : random_states(200, 2)) {
        const Matrix2 mu = st.mu_matrix();
        const double w = st.omega, r = st.r;
        EXPECT_NEAR(mu[0][0].real(), (r * r + w * w) / (2.0 * w), 1e-12 * (1.0 + mu[0][0].real()));
        EXPECT_NEAR(mu[0][1].real(), -r / (2.0 * w), 1e-12 * (1.0 + std::abs(r / w)));
        EXPECT_NEAR(mu[1][1].real(), 1.0 / (2.0 * w), 1e-14 / w);
        const double det = (mu[0][0] * mu[1][1] - mu[0][1] * mu[1][0]).real();
        EXPECT_NEAR(det, 0.25, 1e-11 * (1.0 + mu[0][0].real() * mu[1][1].real()));
    }
}

TEST(ModeStateProperty, LambdaSplitsIntoMuAndSigma) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (const auto& st : random_states(500, 4)) {
        const PhasePoint f1{g(rng), g(rng)}, f2{g(rng), g(rng)};
        const cplx l = st.lambda(f1, f2);
        const cplx rebuilt = st.mu(f1, f2) + cplx(0.0, 0.5) * st.sigma(f1, f2);
        EXPECT_NEAR(std::abs(l - rebuilt), 0.0, 1e-13 * (1.0 + std::abs(l)));
        // mu symmetric, sigma antisymmetric
        EXPECT_NEAR(st.mu(f1, f2), st.mu(f2, f1), 1e-12 * (1.0 + std::abs(st.mu(f1, f2))));
        EXPECT_NEAR(st.sigma(f1, f2), -st.sigma(f2, f1), 1e-12 * (1.0 + std::abs(st.sigma(f1, f2))));
    }
}

TEST(ModeStateProperty, PositivityAndCauchySchwarz) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (const auto& st : random_states(1000, 6)) {
        const auto [lo, hi] = hermitian_eigenvalues(st.mu_matrix());
        EXPECT_GE(lo, -1e-12 * hi);
        const PhasePoint f1{g(rng), g(rng)}, f2{g(rng), g(rng)};
        const double lhs = std::pow(st.sigma(f1, f2), 2);
        const double rhs = 4.0 * st.mu(f1, f1) * st.mu(f2, f2);
        EXPECT_LE(lhs, rhs * (1.0 + 1e-12));
    }
}

TEST(ModeStateProperty, PurityOverRandomMultipliers) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ur(-10.0, 10.0), ul(std::log(0.1), std::log(100.0));
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double r = ur(rng), w = std::exp(ul(rng));
        const Matrix2 s = purity_matrix(r, w);
        const double defect = frobenius_distance(multiply(s, s), s);
        // entry rounding alone gives about eps (r/Omega)^2
        EXPECT_LT(defect, 1e-15 * (1.0 + r * r / (w * w)));
        if (w >= 1.0) worst = std::max(worst, defect);
        const cplx tr = s[0][0] + s[1][1];
        const cplx det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        EXPECT_NEAR(std::abs(tr - 1.0), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(det), 0.0, 1e-12 * (1.0 + r * r / w));
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(ModeState, PurityOfAdiabaticStates) {
    const auto model = ScaleFactorModel::exponential(0.6);
    for (int n = 0; n <= 3; ++n) {
        for (std::int64_t k : {0, 4, 60, 500}) {
            const auto st = ModeQuasifreeState::from(rj_multipliers(model, k, 1.0, n, 0.0), k, 0.0);
            EXPECT_LT(purity_check(st), 1e-12);
        }
    }
    EXPECT_THROW(ModeQuasifreeState::from({0.0, 0.0, false}, 0, 0.0), InvalidArgument);
}

TEST(ModeState, AgreesWithModeFunctionAtCauchyTime) {
    const ScaleFactorModel models[] = {ScaleFactorModel::exponential(0.6), ScaleFactorModel::power_law(0.5, -1.0),
                                       ScaleFactorModel::constant(2.0)};
    for (const auto& model : models) {
        for (std::int64_t k : {0, 7, 90}) {
            const auto rj = rj_multipliers(model, k, 1.0, 2, 0.3);
            const auto st = ModeQuasifreeState::from(rj, k, 0.3);
            const auto d = initial_data_from_multipliers(model, k, 0.3, rj);
            const double a = model.value(0.3);
            const PhasePoint f{0.7, -1.9};
            EXPECT_NEAR(std::abs(one_particle_from_mode(a, d.W, d.Wdot, f) - st.one_particle(f)), 0.0, 1e-13);
            EXPECT_LT(frobenius_distance(lambda_from_mode(a, d.W, d.Wdot), st.lambda_matrix()),
                      1e-12 * (1.0 + std::abs(st.lambda_matrix()[0][0])));
        }
    }
}

TEST(ModeState, TransportedModeKeepsSymplecticPart) {
    const auto model = ScaleFactorModel::exponential(1.0);
    const auto d = adiabatic_initial_data(model, 15, 1.0, 1, 0.0);
    const std::vector<double> t{1.0, 2.5};
    ModeSolverOptions o;
    o.tol = 1e-12;
    const auto tr = solve_mode(model, 1.0, d, 0.0, 2.5, o, t);
    for (const auto& s : tr.samples) {
        const Matrix2 l = lambda_from_mode(model.value(s.t), s.W, s.Wdot);
        Matrix2 sigma{};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) sigma[i][j] = 2.0 * l[i][j].imag();
        EXPECT_LT(frobenius_distance(sigma, symplectic_matrix()), 1e-9);
    }
}

TEST(Sobolev, ModeNormsByHand) {
    const std::vector<ModeCoefficients> data{{0, 1.0, 2.0}, {2, cplx(0.0, 1.0), 0.5}};
    const auto n0 = sobolev_mode_norm(data, 0.0);
    EXPECT_DOUBLE_EQ(n0.q, 1.0 + 9.0);
    EXPECT_DOUBLE_EQ(n0.p, 4.0 + 9.0 * 0.25);
    const auto nh = sobolev_mode_norm(data, 0.5);
    EXPECT_NEAR(nh.q, 1.0 + 9.0 * std::sqrt(5.0), 1e-14);
    EXPECT_NEAR(energy_norm(data), 1.0 + 9.0 * std::sqrt(5.0) + 4.0 + 9.0 * 0.25 / std::sqrt(5.0), 1e-13);
}

TEST(Sobolev, MuNormOfStaticState) {
    const auto model = ScaleFactorModel::constant(1.0);
    const std::vector<ModeCoefficients> data{{3, 1.0, 0.0}, {5, 0.0, 1.0}};
    const double got = mu_norm(data, [&](std::int64_t k) {
        return ModeQuasifreeState::from(rj_multipliers(model, k, 1.0, 0, 0.0), k, 0.0);
    });
    const double w3 = std::sqrt(16.0), w5 = std::sqrt(36.0);
    EXPECT_NEAR(got, 16.0 * w3 / 2.0 + 36.0 / (2.0 * w5), 1e-12);
}

TEST(Sobolev, RatioStaysWithinExactModeBounds) {
    const auto model = ScaleFactorModel::exponential(0.5);
    std::vector<ModeQuasifreeState> states;
    double lo = 1e300, hi = 0.0;
    for (std::int64_t k = 0; k <= 60; ++k) {
        states.push_back(ModeQuasifreeState::from(rj_multipliers(model, k, 1.0, 1, 0.0), k, 0.0));
        const auto [a, b] = mode_ratio_bounds(states.back());
        lo = std::min(lo, a);
        hi = std::max(hi, b);
    }
    const auto ex = mu_sobolev_ratio(states, 2000, 42);
    EXPECT_GE(ex.min, lo * (1.0 - 1e-12));
    EXPECT_LE(ex.max, hi * (1.0 + 1e-12));
    EXPECT_EQ(ex.samples, 2000u);
    const auto again = mu_sobolev_ratio(states, 2000, 42);
    EXPECT_EQ(ex.min, again.min);
    EXPECT_EQ(ex.max, again.max);
}

TEST(Sobolev, EquivalenceConstantsBounded) {
    const auto model = ScaleFactorModel::exponential(0.5);
    for (int n = 0; n <= 2; ++n) {
        std::vector<ModeQuasifreeState> states;
        for (std::int64_t k = 0; k <= 500; ++k) {
            states.push_back(ModeQuasifreeState::from(rj_multipliers(model, k, 1.0, n, 0.0), k, 0.0));
        }
        const auto ex = mu_sobolev_ratio(states, 10000, 99 + static_cast<std::uint64_t>(n));
        EXPECT_GT(ex.min, 0.0);
        EXPECT_LT(ex.max / ex.min, 100.0) << "n=" << n;
    }
}
