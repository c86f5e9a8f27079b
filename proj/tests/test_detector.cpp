#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "adiavac/detector.hpp"

using namespace adiavac;

namespace {

// |int chi(tau) e^{-i nu tau} dtau|^2 by composite Simpson on a fine grid
double window_transform_sq(const WindowFunction& w, double nu) {
    const int n = 20000;
    const double h = (w.tau_b - w.tau_a) / n;
    std::complex<double> acc;
    for (int j = 0; j <= n; ++j) {
        const double t = w.tau_a + j * h;
        const double c = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        acc += c * w(t) * std::polar(1.0, -nu * t);
    }
    return std::norm(acc * h / 3.0);
}

ResponseCurve synthetic(const std::vector<double>& e, auto f) {
    ResponseCurve c;
    c.cutoff_adequate = true;
    c.energies = e;
    for (double x : e) c.values.push_back(f(x));
    return c;
}

}  // namespace

TEST(Window, SmoothBumpShape) {
    const auto w = WindowFunction::smooth_bump(-2.0, 4.0);
    EXPECT_DOUBLE_EQ(w(1.0), 1.0);
    EXPECT_EQ(w(-2.0), 0.0);
    EXPECT_EQ(w(4.0), 0.0);
    EXPECT_EQ(w(5.0), 0.0);
    EXPECT_GT(w(3.9), 0.0);
    EXPECT_LT(w(3.9), 1e-6);
    for (double t = -2.0; t <= 4.0; t += 0.01) EXPECT_LE(w(t), 1.0);
}

TEST(Window, TruncatedGaussianShape) {
    const auto w = WindowFunction::gaussian_truncated(0.0, 2.0, 0.25);
    EXPECT_DOUBLE_EQ(w(1.0), 1.0);
    EXPECT_NEAR(w(1.25), std::exp(-0.5), 1e-15);
    EXPECT_EQ(w(2.5), 0.0);
}

TEST(Detector, StaticGroundStateMatchesWindowTransform) {
    const auto model = ScaleFactorModel::constant(1.0);
    const auto w = WindowFunction::smooth_bump(-3.0, 3.0);
    const std::vector<double> e{0.5, 1.0, 2.0};
    const auto c = detector_response(model, 1.0, 0, 0.0, w, e, 12);
    for (std::size_t i = 0; i < e.size(); ++i) {
        double expected = 0.0;
        for (std::int64_t k = 0; k <= 12; ++k) {
            const double om = omega_at(model, k, 1.0, 0.0);
            expected += ModeChannel{k}.degeneracy() / (2.0 * std::numbers::pi * std::numbers::pi) *
                        window_transform_sq(w, e[i] + om) / (2.0 * om);
        }
        EXPECT_NEAR(c.values[i], expected, 1e-6 * expected) << "E=" << e[i];
    }
}

TEST(DetectorProperty, NonNegative) {
    const auto model = ScaleFactorModel::exponential(0.3);
    const auto e = log_grid(0.5, 6.0, 12);
    for (int n : {0, 1}) {
        const auto c = detector_response(model, 1.0, n, 0.0, WindowFunction::smooth_bump(-2.0, 2.0), e, 30);
        for (double f : c.values) EXPECT_GE(f, 0.0);
        EXPECT_TRUE(c.cutoff_adequate);
        EXPECT_EQ(c.converged.size(), e.size());
    }
}

TEST(DetectorProperty, StaticTranslationInvariance) {
    const auto model = ScaleFactorModel::constant(1.0);
    const auto w = WindowFunction::smooth_bump(-3.0, 3.0);
    const std::vector<double> e{0.7, 1.5, 3.0};
    const auto base = detector_response(model, 1.0, 1, 0.0, w, e, 20);
    for (double shift : {1.7, -4.2}) {
        const auto moved = detector_response(model, 1.0, 1, 0.0, w.shifted(shift), e, 20);
        for (std::size_t i = 0; i < e.size(); ++i) {
            EXPECT_NEAR(moved.values[i], base.values[i], 1e-10 * base.values[i]);
        }
    }
}

TEST(Detector, QuadratureSelfConsistency) {
    const auto c = detector_response(ScaleFactorModel::exponential(0.2), 1.0, 1, 0.0, WindowFunction::smooth_bump(-4.0, 4.0),
                                     std::vector<double>{1.0, 2.0, 4.0}, 40);
    for (double q : c.quadrature_error) EXPECT_LT(q, 1e-6);
}

TEST(Detector, CutoffMustExceedEnergies) {
    const auto model = ScaleFactorModel::constant(1.0);
    const std::vector<double> e{1.0, 10.0};
    EXPECT_THROW(detector_response(model, 1.0, 0, 0.0, WindowFunction::smooth_bump(-1.0, 1.0), e, 5), CutoffInadequate);
}

TEST(Detector, RejectsBadInput) {
    const auto model = ScaleFactorModel::constant(1.0);
    const auto w = WindowFunction::smooth_bump(-1.0, 1.0);
    EXPECT_THROW(detector_response(model, 1.0, 0, 0.0, w, std::vector<double>{}, 5), InvalidArgument);
    EXPECT_THROW(detector_response(model, 1.0, 0, 0.0, w, std::vector<double>{-1.0}, 5), InvalidArgument);
    EXPECT_THROW(detector_response(model, 1.0, 0, 0.0, WindowFunction::smooth_bump(1.0, 1.0), std::vector<double>{1.0}, 5),
                 InvalidArgument);
}

TEST(SlopeFit, ExactPowerLaw) {
    const auto c = synthetic(log_grid(2.0, 30.0, 20), [](double e) { return std::pow(e, -3.0); });
    const auto fit = slope_fit(c, 5.0, 20.0);
    EXPECT_NEAR(fit.slope, -3.0, 1e-6);
}

TEST(SlopeFit, ConstantCurve) {
    const auto c = synthetic(log_grid(1.0, 10.0, 12), [](double) { return 4.2; });
    EXPECT_NEAR(slope_fit(c, 1.0, 10.0).slope, 0.0, 1e-12);
}

TEST(SlopeFit, Preconditions) {
    auto c = synthetic(log_grid(1.0, 10.0, 12), [](double e) { return 1.0 / e; });
    EXPECT_THROW(slope_fit(c, 5.0, 6.0), InsufficientPoints);
    c.cutoff_adequate = false;
    EXPECT_THROW(slope_fit(c, 1.0, 10.0), CutoffInadequate);
}

TEST(BracketExponent, Definition) {
    EXPECT_FALSE(bracket_exponent(1.0).has_value());
    EXPECT_FALSE(bracket_exponent(1.5).has_value());
    EXPECT_EQ(bracket_exponent(1.6), 0);
    EXPECT_EQ(bracket_exponent(2.0), 0);
    EXPECT_EQ(bracket_exponent(2.5), 0);
    EXPECT_EQ(bracket_exponent(3.5), 1);
    EXPECT_EQ(bracket_exponent(4.0), 2);
    EXPECT_EQ(bracket_exponent(6.0), 4);
}
