#pragma once

#include <stdexcept>
#include <string>

namespace cesr {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CESR_DEFINE_ERROR(Name)                      \
  class Name : public Error {                        \
   public:                                           \
    explicit Name(const std::string& what)           \
        : Error(std::string(#Name ": ") + what) {}   \
  }

CESR_DEFINE_ERROR(DimensionMismatch);
CESR_DEFINE_ERROR(DomainError);
CESR_DEFINE_ERROR(NotPositiveSemidefinite);
CESR_DEFINE_ERROR(NotPositiveDefinite);
CESR_DEFINE_ERROR(SingularMatrix);
CESR_DEFINE_ERROR(DegenerateData);
CESR_DEFINE_ERROR(DegenerateSample);
CESR_DEFINE_ERROR(PerturbationFailure);
CESR_DEFINE_ERROR(ZeroDenominator);
CESR_DEFINE_ERROR(ConfigError);
CESR_DEFINE_ERROR(ResampleLimitExceeded);

#undef CESR_DEFINE_ERROR

}  // namespace cesr
