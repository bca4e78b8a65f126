#pragma once

#include <stdexcept>
#include <string>

namespace lmdp {

// Base for every error raised by the library. Each subclass names one
// failure condition so callers (and the CLI) can dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LMDP_DECLARE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

LMDP_DECLARE_ERROR(InvalidInput);
LMDP_DECLARE_ERROR(NonConvergence);
LMDP_DECLARE_ERROR(SupportViolation);
LMDP_DECLARE_ERROR(NonErgodic);
LMDP_DECLARE_ERROR(NotPrimitive);
LMDP_DECLARE_ERROR(NoCycle);
LMDP_DECLARE_ERROR(ZeroMarginal);
LMDP_DECLARE_ERROR(AssumptionViolation);
LMDP_DECLARE_ERROR(GenerationFailed);

#undef LMDP_DECLARE_ERROR

}  // namespace lmdp
