#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adiavac/errors.hpp"
#include "adiavac/jet.hpp"
#include "adiavac/numeric.hpp"

namespace adiavac {

/// Expansion history a(t) of a closed Robertson-Walker universe.
///
/// Every kind supplies exact derivatives of any order through jet_at();
/// nothing here differentiates numerically.
class ScaleFactorModel {
public:
    enum class Kind { constant, power_law, exponential, taylor };

    /// a(t) = a
    static ScaleFactorModel constant(double a) {
        ScaleFactorModel m(Kind::constant);
        m.amplitude_ = a;
        return m;
    }
    /// a(t) = (t - t_ref)^p, defined for t > t_ref
    static ScaleFactorModel power_law(double p, double t_ref) {
        ScaleFactorModel m(Kind::power_law);
        m.exponent_ = p;
        m.t_ref_ = t_ref;
        return m;
    }
    /// a(t) = exp(H t)
    static ScaleFactorModel exponential(double hubble) {
        ScaleFactorModel m(Kind::exponential);
        m.hubble_ = hubble;
        return m;
    }
    /// a(t) = sum_j c_j (t - t_ref)^j, read as a truncated Taylor series:
    /// derivatives beyond the stored degree are unavailable, not zero.
    static ScaleFactorModel taylor(std::vector<double> coeffs, double t_ref) {
        if (coeffs.empty()) {
            throw InvalidArgument("taylor scale factor needs at least one coefficient");
        }
        ScaleFactorModel m(Kind::taylor);
        m.coeffs_ = std::move(coeffs);
        m.t_ref_ = t_ref;
        return m;
    }

    Kind kind() const noexcept { return kind_; }
    bool is_static() const noexcept {
        if (kind_ == Kind::constant) return true;
        if (kind_ == Kind::exponential) return hubble_ == 0.0;
        if (kind_ == Kind::power_law) return exponent_ == 0.0;
        for (std::size_t j = 1; j < coeffs_.size(); ++j) {
            if (coeffs_[j] != 0.0) return false;
        }
        return true;
    }
    double amplitude() const noexcept { return amplitude_; }
    double exponent() const noexcept { return exponent_; }
    double hubble() const noexcept { return hubble_; }
    double t_ref() const noexcept { return t_ref_; }
    const std::vector<double>& taylor_coeffs() const noexcept { return coeffs_; }

    std::string kind_name() const {
        switch (kind_) {
            case Kind::constant: return "constant";
            case Kind::power_law: return "power_law";
            case Kind::exponential: return "exponential";
            case Kind::taylor: return "taylor";
        }
        return "unknown";
    }

    /// Exact order-d jet of a at t0.
    Jet jet_at(double t0, std::size_t d) const {
        std::vector<double> c(d + 1, 0.0);
        switch (kind_) {
            case Kind::constant:
                c[0] = amplitude_;
                break;
            case Kind::exponential: {
                double term = std::exp(hubble_ * t0);
                for (std::size_t j = 0; j <= d; ++j) {
                    c[j] = term;
                    term *= hubble_ / static_cast<double>(j + 1);
                }
                break;
            }
            case Kind::power_law: {
                const double x = t0 - t_ref_;
                if (!(x > 0.0)) {
                    throw NonPositiveScaleFactor("power law evaluated at t <= t_ref");
                }
                for (std::size_t j = 0; j <= d; ++j) {
                    c[j] = binomial(exponent_, j) * std::pow(x, exponent_ - static_cast<double>(j));
                }
                break;
            }
            case Kind::taylor: {
                if (coeffs_.size() < d + 1) {
                    throw OrderUnavailable("taylor model stores " + std::to_string(coeffs_.size()) +
                                           " coefficients, order " + std::to_string(d) + " requested");
                }
                const double s = t0 - t_ref_;
                // a^(i)(t0)/i! = sum_{j>=i} c_j C(j,i) s^(j-i)
                for (std::size_t i = 0; i <= d; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = coeffs_.size(); j-- > i;) {
                        acc = acc * s + coeffs_[j] * binomial(static_cast<double>(j), i);
                    }
                    c[i] = acc;
                }
                break;
            }
        }
        if (!(c[0] > 0.0)) {
            throw NonPositiveScaleFactor("a(" + std::to_string(t0) + ") = " + std::to_string(c[0]));
        }
        return Jet(t0, std::move(c));
    }

    /// a(t) and a'(t) in closed form; the mode integrator's hot path.
    std::pair<double, double> value_and_rate(double t) const {
        double a = 0.0, adot = 0.0;
        switch (kind_) {
            case Kind::constant:
                a = amplitude_;
                break;
            case Kind::exponential:
                a = std::exp(hubble_ * t);
                adot = hubble_ * a;
                break;
            case Kind::power_law: {
                const double x = t - t_ref_;
                if (!(x > 0.0)) throw NonPositiveScaleFactor("power law evaluated at t <= t_ref");
                a = std::pow(x, exponent_);
                adot = exponent_ * a / x;
                break;
            }
            case Kind::taylor: {
                const double s = t - t_ref_;
                for (std::size_t j = coeffs_.size(); j-- > 0;) {
                    adot = adot * s + a;
                    a = a * s + coeffs_[j];
                }
                break;
            }
        }
        if (!(a > 0.0)) {
            throw NonPositiveScaleFactor("a(" + std::to_string(t) + ") = " + std::to_string(a));
        }
        return {a, adot};
    }

    double value(double t) const { return value_and_rate(t).first; }

private:
    explicit ScaleFactorModel(Kind k) : kind_(k) {}

    Kind kind_;
    double amplitude_ = 1.0;
    double exponent_ = 0.0;
    double hubble_ = 0.0;
    double t_ref_ = 0.0;
    std::vector<double> coeffs_;
};

/// One eigenspace of the Laplacian on the unit three-sphere.
struct ModeChannel {
    std::int64_t k = 0;

    /// -Delta phi_k = k(k+2) phi_k
    double eigenvalue() const noexcept {
        const auto kk = static_cast<double>(k);
        return kk * (kk + 2.0);
    }
    /// Number of (l, m) labels sharing k.
    double degeneracy() const noexcept {
        const auto kk = static_cast<double>(k);
        return (kk + 1.0) * (kk + 1.0);
    }
};

inline void check_mass(std::int64_t k, double m) {
    if (k < 0) throw InvalidArgument("mode index must be non-negative");
    if (!std::isfinite(m) || m < 0.0) throw InvalidArgument("mass must be finite and non-negative");
    if (m == 0.0 && k == 0) {
        throw InvalidArgument("massless k = 0 channel has omega = 0");
    }
}

/// omega_k(t)^2 = k(k+2)/a(t)^2 + m^2 as an order-d jet.
inline Jet omega_squared_jet(const ScaleFactorModel& model, std::int64_t k, double m, double t0, std::size_t d) {
    check_mass(k, m);
    const Jet a = model.jet_at(t0, d);
    return ModeChannel{k}.eigenvalue() / square(a) + m * m;
}

inline Jet omega_jet(const ScaleFactorModel& model, std::int64_t k, double m, double t0, std::size_t d) {
    return sqrt(omega_squared_jet(model, k, m, t0, d));
}

/// Scalar omega_k(t).
inline double omega_at(const ScaleFactorModel& model, std::int64_t k, double m, double t) {
    const double a = model.value(t);
    return std::sqrt(ModeChannel{k}.eigenvalue() / (a * a) + m * m);
}

}  // namespace adiavac
