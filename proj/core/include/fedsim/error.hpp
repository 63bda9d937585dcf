#pragma once

#include <stdexcept>
#include <string>

namespace fedsim {

// Base of every error the library throws. Callers that only care about
// "something in the simulator failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FEDSIM_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

FEDSIM_DEFINE_ERROR(ZeroMassError);    // normalizing an all-zero count vector
FEDSIM_DEFINE_ERROR(DimensionError);   // vector lengths disagree
FEDSIM_DEFINE_ERROR(DomainError);      // argument outside its valid range
FEDSIM_DEFINE_ERROR(InfeasibleError);  // constraints cannot be satisfied
FEDSIM_DEFINE_ERROR(EmptyClassError);  // a class has no samples to distribute
FEDSIM_DEFINE_ERROR(NumericalError);   // non-finite value during training
FEDSIM_DEFINE_ERROR(FormatError);      // malformed input file
FEDSIM_DEFINE_ERROR(IoError);          // file could not be opened or written
FEDSIM_DEFINE_ERROR(ConfigError);      // bad configuration key or value

#undef FEDSIM_DEFINE_ERROR

// Rethrows `e` as the same dynamic error type with `context` prepended.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

}  // namespace fedsim
