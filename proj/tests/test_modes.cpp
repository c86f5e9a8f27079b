#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "adiavac/modes.hpp"

using namespace adiavac;

namespace {

ModeSolverOptions tight(double tol) {
    ModeSolverOptions o;
    o.tol = tol;
    return o;
}

std::vector<ScaleFactorModel> test_models() {
    return {ScaleFactorModel::constant(1.0), ScaleFactorModel::exponential(0.6), ScaleFactorModel::exponential(0.2),
            ScaleFactorModel::power_law(2.0 / 3.0, -1.0), ScaleFactorModel::power_law(0.5, -1.0)};
}

}  // namespace

TEST(ModeInitialData, WronskianNormalized) {
    for (const auto& model : test_models()) {
        for (std::int64_t k : {0, 1, 10, 300}) {
            for (int n : {0, 1, 2}) {
                const auto d = adiabatic_initial_data(model, k, 1.0, n, 0.5);
                EXPECT_NEAR(std::abs(wronskian(model, d) - cplx(0.0, 1.0)), 0.0, 1e-13);
                EXPECT_GT(d.W.real(), 0.0);
                EXPECT_EQ(d.W.imag(), 0.0);
            }
        }
    }
}

TEST(SolveMode, StaticExactSolution) {
    const auto model = ScaleFactorModel::constant(1.0);
    for (std::int64_t k : {0, 3, 40}) {
        const double w = omega_at(model, k, 1.0, 0.0);
        const double period = 2.0 * std::numbers::pi / w;
        const auto d = adiabatic_initial_data(model, k, 1.0, 2, 0.0);
        for (double tol : {1e-8, 1e-10}) {
            const auto tr = solve_mode(model, 1.0, d, 0.0, 20.0 * period, tight(tol));
            double worst = 0.0;
            for (const auto& s : tr.samples) {
                const cplx exact = std::exp(cplx(0.0, -w * s.t)) / std::sqrt(2.0 * w);
                worst = std::max(worst, std::abs(s.W - exact));
            }
            EXPECT_LT(worst, 10.0 * tol) << "k=" << k << " tol=" << tol;
        }
    }
}

TEST(SolveMode, WronskianDriftPerUnitTime) {
    for (const auto& model : test_models()) {
        for (std::int64_t k : {0, 5, 50, 200}) {
            const auto d = adiabatic_initial_data(model, k, 1.0, 1, 0.5);
            const auto tr = solve_mode(model, 1.0, d, 0.5, 6.5, tight(1e-10));
            EXPECT_LT(tr.stats.max_wronskian_drift / 6.0, 1e-9) << model.kind_name() << " k=" << k;
        }
    }
}

TEST(SolveMode, SampleTimesAreExact) {
    const auto model = ScaleFactorModel::exponential(0.5);
    const auto d = adiabatic_initial_data(model, 7, 1.0, 1, 0.0);
    const std::vector<double> times{-2.0, -0.5, 0.0, 0.25, 3.0};
    const auto tr = solve_mode(model, 1.0, d, -2.0, 3.0, tight(1e-11), times);
    ASSERT_EQ(tr.samples.size(), times.size());
    for (std::size_t i = 0; i < times.size(); ++i) EXPECT_EQ(tr.samples[i].t, times[i]);
    EXPECT_EQ(tr.samples[2].W, d.W);
}

TEST(SolveMode, BackwardRoundTrip) {
    const auto model = ScaleFactorModel::power_law(2.0 / 3.0, -1.0);
    const auto d = adiabatic_initial_data(model, 12, 1.0, 2, 0.0);
    const std::vector<double> end{4.0};
    const auto fwd = solve_mode(model, 1.0, d, 0.0, 4.0, tight(1e-12), end);
    const ModeInitialData at_end = fwd.data_at(0);
    const std::vector<double> start{0.0};
    const auto back = solve_mode(model, 1.0, at_end, 0.0, 4.0, tight(1e-12), start);
    EXPECT_NEAR(std::abs(back.samples[0].W - d.W), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(back.samples[0].Wdot - d.Wdot), 0.0, 1e-8);
}

TEST(SolveModeProperty, ConjugateDataGivesConjugateSolution) {
    const auto model = ScaleFactorModel::exponential(1.0);
    const auto d = adiabatic_initial_data(model, 9, 1.0, 1, 0.0);
    ModeInitialData c = d;
    c.W = std::conj(d.W);
    c.Wdot = std::conj(d.Wdot);
    const std::vector<double> t{1.5};
    ModeSolverOptions o = tight(1e-11);
    o.wronskian_tolerance = 1.0;  // conjugate data has Wronskian -i
    const auto a = solve_mode(model, 1.0, d, 0.0, 1.5, o, t);
    const auto b = solve_mode(model, 1.0, c, 0.0, 1.5, o, t);
    EXPECT_NEAR(std::abs(std::conj(a.samples[0].W) - b.samples[0].W), 0.0, 1e-13);
}

TEST(SolveModeProperty, Linearity) {
    const auto model = ScaleFactorModel::exponential(0.7);
    const auto d1 = adiabatic_initial_data(model, 6, 1.0, 0, 0.0);
    const auto d2 = adiabatic_initial_data(model, 6, 1.0, 2, 0.0);
    const cplx c1(0.3, -1.2), c2(-0.7, 0.4);
    ModeInitialData sum{6, 0.0, c1 * d1.W + c2 * d2.W, c1 * d1.Wdot + c2 * d2.Wdot};
    ModeSolverOptions o = tight(1e-12);
    o.wronskian_tolerance = 1.0;
    const std::vector<double> t{2.0};
    const auto s1 = solve_mode(model, 1.0, d1, 0.0, 2.0, o, t);
    const auto s2 = solve_mode(model, 1.0, d2, 0.0, 2.0, o, t);
    const auto ss = solve_mode(model, 1.0, sum, 0.0, 2.0, o, t);
    const cplx combined = c1 * s1.samples[0].W + c2 * s2.samples[0].W;
    EXPECT_NEAR(std::abs(ss.samples[0].W - combined), 0.0, 1e-10);
}

TEST(SolveMode, RejectsBadSpans) {
    const auto model = ScaleFactorModel::constant(1.0);
    const auto d = adiabatic_initial_data(model, 1, 1.0, 0, 0.0);
    EXPECT_THROW(solve_mode(model, 1.0, d, 1.0, 2.0), InvalidArgument);
    const std::vector<double> unsorted{0.5, 0.2};
    EXPECT_THROW(solve_mode(model, 1.0, d, 0.0, 1.0, {}, unsorted), InvalidArgument);
    const std::vector<double> outside{3.0};
    EXPECT_THROW(solve_mode(model, 1.0, d, 0.0, 1.0, {}, outside), InvalidArgument);
}

TEST(SolveMode, DriftToleranceEnforced) {
    const auto model = ScaleFactorModel::exponential(1.0);
    const auto d = adiabatic_initial_data(model, 30, 1.0, 1, 0.0);
    ModeSolverOptions o = tight(1e-4);
    o.wronskian_tolerance = 1e-14;
    EXPECT_THROW(solve_mode(model, 1.0, d, 0.0, 3.0, o), ToleranceNotMet);
}

TEST(SolveMode, ConvergenceOrder) {
    // error against a tight reference as the tolerance is tightened
    const auto model = ScaleFactorModel::exponential(0.5);
    const auto d = adiabatic_initial_data(model, 4, 1.0, 1, 0.0);
    const std::vector<double> t{5.0};
    ModeSolverOptions ref_o = tight(1e-14);
    ref_o.min_steps_per_period = 0.0;
    const cplx ref = solve_mode(model, 1.0, d, 0.0, 5.0, ref_o, t).samples[0].W;
    std::vector<double> mean_h, errs;
    for (double tol : {1e-5, 1e-6, 1e-7, 1e-8}) {
        ModeSolverOptions o = tight(tol);
        o.min_steps_per_period = 0.0;
        o.wronskian_tolerance = 1.0;
        const auto tr = solve_mode(model, 1.0, d, 0.0, 5.0, o, t);
        mean_h.push_back(5.0 / static_cast<double>(tr.stats.steps));
        errs.push_back(std::abs(tr.samples[0].W - ref));
    }
    const auto fit = fit_log_log(mean_h, errs);
    EXPECT_NEAR(fit.slope, 8.0, 1.0);
}
