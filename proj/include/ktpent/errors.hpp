#pragma once

#include <stdexcept>
#include <string>

namespace ktpent {

/// Broad failure classes; each maps onto one CLI exit code.
enum class ErrorClass {
  validation,  // bad parameters or malformed input (exit 1)
  solver,      // a root or curve could not be found (exit 2)
  io,          // file could not be read or written (exit 3)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), class_(cls), kind_(std::move(kind)) {}

  ErrorClass error_class() const noexcept { return class_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorClass class_;
  std::string kind_;
};

#define KTPENT_DEFINE_ERROR(Name, Class)                                      \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& what) : Error(Class, #Name, what) {}     \
  }

// Query lies outside a model's declared validity window.
KTPENT_DEFINE_ERROR(OutOfRange, ErrorClass::validation);
KTPENT_DEFINE_ERROR(EnergyConservationViolated, ErrorClass::validation);
KTPENT_DEFINE_ERROR(ParamOutOfRange, ErrorClass::validation);
KTPENT_DEFINE_ERROR(ZeroDenominator, ErrorClass::validation);
KTPENT_DEFINE_ERROR(Degenerate, ErrorClass::validation);
KTPENT_DEFINE_ERROR(ValidationError, ErrorClass::validation);
KTPENT_DEFINE_ERROR(NoBracket, ErrorClass::solver);
KTPENT_DEFINE_ERROR(NoSolutionInRange, ErrorClass::solver);
KTPENT_DEFINE_ERROR(EmptyCurve, ErrorClass::solver);
KTPENT_DEFINE_ERROR(IoError, ErrorClass::io);

#undef KTPENT_DEFINE_ERROR

}  // namespace ktpent
