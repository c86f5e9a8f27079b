#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "adiavac/dop853.hpp"
#include "adiavac/numeric.hpp"

using adiavac::Dop853;
using adiavac::Dop853Options;

namespace {

using Solver = Dop853<2>;
using State = Solver::State;

auto oscillator(double w) {
    return [w](double, const State& y, State& dy) {
        dy[0] = y[1];
        dy[1] = -w * w * y[0];
    };
}

auto never = [](double, double) { return false; };
auto ignore = [](const Solver::DenseStep&, double, const State&) {};

}  // namespace

TEST(Dop853, HarmonicOscillatorEndpoint) {
    Dop853Options o;
    o.rtol = o.atol = 1e-12;
    Solver s(o);
    State y{1.0, 0.0};
    const double w = 3.0, t_end = 10.0;
    const auto st = s.integrate(oscillator(w), 0.0, y, t_end, never, ignore);
    EXPECT_NEAR(y[0], std::cos(w * t_end), 1e-10);
    EXPECT_NEAR(y[1], -w * std::sin(w * t_end), 1e-9);
    EXPECT_GT(st.steps, 0);
}

TEST(Dop853, BackwardIntegration) {
    Dop853Options o;
    o.rtol = o.atol = 1e-12;
    Solver s(o);
    State y{1.0, 0.0};
    s.integrate(oscillator(2.0), 0.0, y, -7.5, never, ignore);
    EXPECT_NEAR(y[0], std::cos(2.0 * 7.5), 1e-10);
    EXPECT_NEAR(y[1], 2.0 * std::sin(2.0 * 7.5), 1e-10);
}

TEST(Dop853, DenseOutputBetweenSteps) {
    Dop853Options o;
    o.rtol = o.atol = 1e-11;
    Solver s(o);
    State y{1.0, 0.0};
    double worst = 0.0;
    int probes = 0;
    s.integrate(
        oscillator(1.0), 0.0, y, 20.0, [](double, double) { return true; },
        [&](const Solver::DenseStep& step, double, const State&) {
            for (int i = 1; i < 4; ++i) {
                const double t = step.t_begin() + (step.t_end() - step.t_begin()) * i / 4.0;
                worst = std::max(worst, std::abs(step(t)[0] - std::cos(t)));
                ++probes;
            }
        });
    EXPECT_GT(probes, 30);
    EXPECT_LT(worst, 1e-9);
}

TEST(Dop853, StepCapIsHonoured) {
    Dop853Options o;
    o.rtol = o.atol = 1e-6;
    o.h_max = 0.01;
    Solver s(o);
    State y{1.0, 0.0};
    double prev = 0.0, largest = 0.0;
    s.integrate(oscillator(1.0), 0.0, y, 2.0, never, [&](const Solver::DenseStep&, double t, const State&) {
        largest = std::max(largest, t - prev);
        prev = t;
    });
    EXPECT_LE(largest, 0.01 * (1.0 + 1e-12));
}

TEST(Dop853, StepBudgetExhaustion) {
    Dop853Options o;
    o.rtol = o.atol = 1e-12;
    o.max_steps = 5;
    Solver s(o);
    State y{1.0, 0.0};
    EXPECT_THROW(s.integrate(oscillator(50.0), 0.0, y, 10.0, never, ignore), adiavac::ToleranceNotMet);
}

TEST(Dop853, ConvergenceOrderNearEight) {
    // fixed-step behaviour via a tight step cap and loose tolerance
    std::vector<double> hs, errs;
    for (double h : {1.0, 0.7, 0.5}) {
        Dop853Options o;
        o.rtol = o.atol = 1.0;
        o.h_max = h;
        Solver s(o);
        State y{1.0, 0.0};
        s.integrate(oscillator(1.0), 0.0, y, 4.0, never, ignore);
        hs.push_back(h);
        errs.push_back(std::abs(y[0] - std::cos(4.0)));
    }
    const auto fit = adiavac::fit_log_log(hs, errs);
    EXPECT_NEAR(fit.slope, 8.0, 1.0) << errs[0] << " " << errs[1] << " " << errs[2];
}
