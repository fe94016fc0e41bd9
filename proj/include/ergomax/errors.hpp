#pragma once

/**
 * @file errors.hpp
 * @brief Exception types raised by the ergomax library.
 */

#include <stdexcept>
#include <string>

namespace ergomax {

/** Base class; kind() names the error category for reports. */
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define ERGOMAX_DEFINE_ERROR(Name)                                         \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(#Name, what) {}     \
    };

// polyalg
ERGOMAX_DEFINE_ERROR(NonIntegralScale)
ERGOMAX_DEFINE_ERROR(ZeroPolynomial)
// family
ERGOMAX_DEFINE_ERROR(ShapeMismatch)
ERGOMAX_DEFINE_ERROR(BasicType)
ERGOMAX_DEFINE_ERROR(DegeneratePair)
ERGOMAX_DEFINE_ERROR(InvalidFamily)
// reduction
ERGOMAX_DEFINE_ERROR(SameIndex)
ERGOMAX_DEFINE_ERROR(OutOfSupport)
ERGOMAX_DEFINE_ERROR(NotControllable)
ERGOMAX_DEFINE_ERROR(BadTarget)
ERGOMAX_DEFINE_ERROR(RangeR)
ERGOMAX_DEFINE_ERROR(MissingInvariance)
ERGOMAX_DEFINE_ERROR(Controllable)
ERGOMAX_DEFINE_ERROR(IllFormedStep)
ERGOMAX_DEFINE_ERROR(PolicyExhausted)
// finsys
ERGOMAX_DEFINE_ERROR(EmptyModulus)
ERGOMAX_DEFINE_ERROR(NotTranslation)
ERGOMAX_DEFINE_ERROR(InvalidSystem)
ERGOMAX_DEFINE_ERROR(InvalidObservable)
// averages
ERGOMAX_DEFINE_ERROR(NegativeBeyondTolerance)
ERGOMAX_DEFINE_ERROR(SpanNotCertified)
ERGOMAX_DEFINE_ERROR(ProductTooLarge)
ERGOMAX_DEFINE_ERROR(InvalidSpec)
// cli
ERGOMAX_DEFINE_ERROR(ConfigError)

#undef ERGOMAX_DEFINE_ERROR

} // namespace ergomax
