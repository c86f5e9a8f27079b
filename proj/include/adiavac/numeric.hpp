#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "adiavac/errors.hpp"

namespace adiavac {

/// Neumaier-compensated accumulator. Mode sums run over up to ~10^3
/// channels with terms spanning many decades; this keeps aggregates
/// reproducible to ~1e-16 independent of how terms are grouped.
class CompensatedSum {
public:
    CompensatedSum& operator+=(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Least-squares line through (log x, log y).
struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    std::size_t points = 0;
};

inline LogLogFit fit_log_log(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw InvalidArgument("fit_log_log: size mismatch");
    }
    if (x.size() < 2) {
        throw InsufficientPoints("fit_log_log needs at least two points");
    }
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) {
            throw DegenerateFit("non-positive or non-finite sample in log-log fit");
        }
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    const auto n = static_cast<double>(x.size());
    CompensatedSum sx, sy;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
    }
    const double mx = sx.value() / n;
    const double my = sy.value() / n;
    CompensatedSum sxx, sxy;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx.value() > 0.0)) {
        throw DegenerateFit("abscissae are all equal");
    }
    LogLogFit fit;
    fit.points = x.size();
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = my - fit.slope * mx;
    if (x.size() > 2) {
        CompensatedSum ssr;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
            ssr += r * r;
        }
        fit.slope_stderr = std::sqrt(ssr.value() / (n - 2.0) / sxx.value());
    }
    return fit;
}

/// Generalized binomial coefficient C(p, j) for real p.
inline double binomial(double p, std::size_t j) {
    double c = 1.0;
    for (std::size_t i = 0; i < j; ++i) {
        c *= (p - static_cast<double>(i)) / static_cast<double>(i + 1);
    }
    return c;
}

/// Logarithmically spaced grid of `count` points in [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) {
        throw InvalidArgument("log_grid needs 0 < lo < hi and count >= 2");
    }
    std::vector<double> g(count);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        g[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

}  // namespace adiavac
