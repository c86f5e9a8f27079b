#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "adiavac/errors.hpp"

namespace adiavac {

/// Truncated Taylor expansion f(t0 + s) = sum_j c_j s^j, j = 0..order.
///
/// Arithmetic is closed on jets sharing base point and order; mixing
/// either throws JetMismatch. Use truncated() to bring operands to a
/// common order first.
class Jet {
public:
    Jet(double base_point, std::vector<double> coeffs) : t0_(base_point), c_(std::move(coeffs)) {
        if (c_.empty()) {
            throw InvalidArgument("jet needs at least one coefficient");
        }
        for (double v : c_) {
            if (!std::isfinite(v)) {
                throw InvalidArgument("jet coefficient is not finite");
            }
        }
    }

    static Jet constant(double base_point, double value, std::size_t order) {
        std::vector<double> c(order + 1, 0.0);
        c[0] = value;
        return Jet(base_point, std::move(c));
    }

    /// The identity function t, expanded at base_point.
    static Jet variable(double base_point, std::size_t order) {
        std::vector<double> c(order + 1, 0.0);
        c[0] = base_point;
        if (order >= 1) c[1] = 1.0;
        return Jet(base_point, std::move(c));
    }

    double base_point() const noexcept { return t0_; }
    std::size_t order() const noexcept { return c_.size() - 1; }
    std::span<const double> coeffs() const noexcept { return c_; }
    double operator[](std::size_t j) const { return c_.at(j); }
    double value() const noexcept { return c_[0]; }

    /// f^(j)(t0) = j! c_j.
    double derivative(std::size_t j) const {
        double f = c_.at(j);
        for (std::size_t i = 2; i <= j; ++i) f *= static_cast<double>(i);
        return f;
    }

    /// Jet of f' at the same point; one order lower.
    Jet differentiate() const {
        if (order() == 0) {
            throw OrderUnavailable("cannot differentiate an order-0 jet");
        }
        std::vector<double> d(order());
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = static_cast<double>(j + 1) * c_[j + 1];
        return Jet(t0_, std::move(d));
    }

    Jet truncated(std::size_t new_order) const {
        if (new_order > order()) {
            throw OrderUnavailable("cannot raise jet order from " + std::to_string(order()) + " to " +
                                   std::to_string(new_order));
        }
        return Jet(t0_, std::vector<double>(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(new_order) + 1));
    }

    /// Replaces the value component; used by the positivity clamp.
    Jet with_value(double v) const {
        Jet r = *this;
        r.c_[0] = v;
        return r;
    }

    double evaluate(double t) const {
        const double s = t - t0_;
        double acc = 0.0;
        for (std::size_t j = c_.size(); j-- > 0;) acc = acc * s + c_[j];
        return acc;
    }

    Jet operator-() const {
        Jet r = *this;
        for (double& v : r.c_) v = -v;
        return r;
    }

    Jet& operator+=(const Jet& y) {
        check_compatible(y);
        for (std::size_t j = 0; j < c_.size(); ++j) c_[j] += y.c_[j];
        return *this;
    }
    Jet& operator-=(const Jet& y) {
        check_compatible(y);
        for (std::size_t j = 0; j < c_.size(); ++j) c_[j] -= y.c_[j];
        return *this;
    }
    Jet& operator*=(double s) {
        for (double& v : c_) v *= s;
        return *this;
    }
    Jet& operator+=(double s) {
        c_[0] += s;
        return *this;
    }

    friend Jet operator+(Jet x, const Jet& y) { return x += y; }
    friend Jet operator-(Jet x, const Jet& y) { return x -= y; }
    friend Jet operator+(Jet x, double s) { return x += s; }
    friend Jet operator+(double s, Jet x) { return x += s; }
    friend Jet operator-(Jet x, double s) { return x += -s; }
    friend Jet operator-(double s, const Jet& x) { return (-x) + s; }
    friend Jet operator*(Jet x, double s) { return x *= s; }
    friend Jet operator*(double s, Jet x) { return x *= s; }
    friend Jet operator/(Jet x, double s) { return x *= 1.0 / s; }

    friend Jet operator*(const Jet& x, const Jet& y) {
        x.check_compatible(y);
        std::vector<double> r(x.c_.size(), 0.0);
        for (std::size_t n = 0; n < r.size(); ++n) {
            double acc = 0.0;
            for (std::size_t j = 0; j <= n; ++j) acc += x.c_[j] * y.c_[n - j];
            r[n] = acc;
        }
        return Jet(x.t0_, std::move(r));
    }

    friend Jet operator/(const Jet& x, const Jet& y) {
        x.check_compatible(y);
        if (y.c_[0] == 0.0) {
            throw DivisionByZeroJet("divisor has zero value component");
        }
        std::vector<double> q(x.c_.size(), 0.0);
        for (std::size_t n = 0; n < q.size(); ++n) {
            double acc = x.c_[n];
            for (std::size_t j = 1; j <= n; ++j) acc -= y.c_[j] * q[n - j];
            q[n] = acc / y.c_[0];
        }
        return Jet(x.t0_, std::move(q));
    }

    friend Jet operator/(double s, const Jet& y) { return Jet::constant(y.t0_, s, y.order()) / y; }

    friend Jet sqrt(const Jet& x) {
        if (!(x.c_[0] > 0.0)) {
            throw NegativeSqrtJet("value component " + std::to_string(x.c_[0]) + " is not positive");
        }
        std::vector<double> s(x.c_.size(), 0.0);
        s[0] = std::sqrt(x.c_[0]);
        for (std::size_t n = 1; n < s.size(); ++n) {
            double acc = x.c_[n];
            for (std::size_t j = 1; j < n; ++j) acc -= s[j] * s[n - j];
            s[n] = acc / (2.0 * s[0]);
        }
        return Jet(x.t0_, std::move(s));
    }

    /// x^p for real p; needs a positive value component.
    friend Jet pow(const Jet& x, double p) {
        if (!(x.c_[0] > 0.0)) {
            throw InvalidArgument("pow of a jet needs a positive value component");
        }
        std::vector<double> y(x.c_.size(), 0.0);
        y[0] = std::pow(x.c_[0], p);
        for (std::size_t n = 1; n < y.size(); ++n) {
            double acc = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                acc += ((p + 1.0) * static_cast<double>(j) - static_cast<double>(n)) * x.c_[j] * y[n - j];
            }
            y[n] = acc / (static_cast<double>(n) * x.c_[0]);
        }
        return Jet(x.t0_, std::move(y));
    }

    friend Jet square(const Jet& x) { return x * x; }

private:
    void check_compatible(const Jet& y) const {
        if (t0_ != y.t0_ || c_.size() != y.c_.size()) {
            throw JetMismatch("base points or orders differ");
        }
    }

    double t0_;
    std::vector<double> c_;
};

}  // namespace adiavac
