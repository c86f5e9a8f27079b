#pragma once

#include <stdexcept>
#include <string>

namespace adiavac {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define ADIAVAC_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                      \
    public:                                                          \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

ADIAVAC_DEFINE_ERROR(InvalidArgument);
ADIAVAC_DEFINE_ERROR(NonPositiveScaleFactor);
ADIAVAC_DEFINE_ERROR(OrderUnavailable);
ADIAVAC_DEFINE_ERROR(JetMismatch);
ADIAVAC_DEFINE_ERROR(DivisionByZeroJet);
ADIAVAC_DEFINE_ERROR(NegativeSqrtJet);
ADIAVAC_DEFINE_ERROR(DegenerateFit);
ADIAVAC_DEFINE_ERROR(InsufficientPoints);
ADIAVAC_DEFINE_ERROR(StepSizeUnderflow);
ADIAVAC_DEFINE_ERROR(ToleranceNotMet);
ADIAVAC_DEFINE_ERROR(NotNormalized);
ADIAVAC_DEFINE_ERROR(CutoffInadequate);
ADIAVAC_DEFINE_ERROR(ConfigInvalid);

#undef ADIAVAC_DEFINE_ERROR

/// Raised when the frequency recursion drives (Omega_k^(n))^2 to or below
/// zero at the Cauchy time and the positivity action is strict.
class FrequencySquaredNonPositive : public Error {
public:
    FrequencySquaredNonPositive(long long k, int n, double value)
        : Error("FrequencySquaredNonPositive: k=" + std::to_string(k) + " n=" + std::to_string(n) +
                " value=" + std::to_string(value)),
          k_(k), n_(n) {}
    long long k() const noexcept { return k_; }
    int n() const noexcept { return n_; }

private:
    long long k_;
    int n_;
};

}  // namespace adiavac
