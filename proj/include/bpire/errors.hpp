#pragma once

#include <stdexcept>
#include <string>

namespace bpire {

// Every failure raised by the toolkit derives from Error so callers can catch
// the whole family; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BPIRE_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

BPIRE_DEFINE_ERROR(ValidationError);
BPIRE_DEFINE_ERROR(ParseError);
BPIRE_DEFINE_ERROR(DomainError);
BPIRE_DEFINE_ERROR(NoCramerRoot);
BPIRE_DEFINE_ERROR(NotSubcritical);
BPIRE_DEFINE_ERROR(CramerNotSatisfied);
BPIRE_DEFINE_ERROR(OverflowGuard);
BPIRE_DEFINE_ERROR(SummationCapExceeded);
BPIRE_DEFINE_ERROR(DegenerateTail);
BPIRE_DEFINE_ERROR(InsufficientExceedances);
BPIRE_DEFINE_ERROR(TooFewExceedances);
BPIRE_DEFINE_ERROR(NotTwoPointLattice);
BPIRE_DEFINE_ERROR(RegimeMismatch);
BPIRE_DEFINE_ERROR(IllConditionedFit);
BPIRE_DEFINE_ERROR(HorizonTooSmall);
BPIRE_DEFINE_ERROR(StepBudgetExceeded);

#undef BPIRE_DEFINE_ERROR

}  // namespace bpire
