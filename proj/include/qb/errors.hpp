#pragma once

#include <stdexcept>
#include <string>

namespace qb {

/// Base of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define QB_DEFINE_ERROR(Name)                 \
  struct Name : Error {                       \
    explicit Name(const std::string& what)    \
        : Error(#Name ": " + what) {}         \
  }

// forms
QB_DEFINE_ERROR(DegreeMismatch);
QB_DEFINE_ERROR(DimMismatch);
QB_DEFINE_ERROR(SingularChange);
QB_DEFINE_ERROR(ZeroLinearForm);
QB_DEFINE_ERROR(WrongDegree);
QB_DEFINE_ERROR(ParseError);

// square classes / cohomology
QB_DEFINE_ERROR(OutsideUniverse);
QB_DEFINE_ERROR(NotAUnit);
QB_DEFINE_ERROR(PreconditionFailed);
QB_DEFINE_ERROR(CannotCertify);

// arrangements
QB_DEFINE_ERROR(ResampleExhausted);

// bundles
QB_DEFINE_ERROR(HypothesisViolated);
QB_DEFINE_ERROR(ParityViolated);
QB_DEFINE_ERROR(ParityMismatch);
QB_DEFINE_ERROR(DegreeShortfall);
QB_DEFINE_ERROR(RangeError);
QB_DEFINE_ERROR(IndexError);

#undef QB_DEFINE_ERROR

}  // namespace qb
