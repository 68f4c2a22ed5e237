#pragma once

#include <stdexcept>
#include <string>

namespace strathjb {

//! Base class for all domain errors thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Query point lies outside the stratification box.
struct OutOfBoxError : Error {
  using Error::Error;
};

//! Two strata of equal dimension both claim the query point.
struct AmbiguousLocationError : Error {
  using Error::Error;
};

//! Stratification does not cover the query point (invalid decomposition).
struct UncoveredPointError : Error {
  using Error::Error;
};

//! A top-dimensional stratum has no dynamics rule attached.
struct NoRuleForRegionError : Error {
  using Error::Error;
};

//! Time step violates the CFL bound dt <= dx / max|b|.
struct CflViolationError : Error {
  using Error::Error;
};

//! Grid nodes do not land on every declared interface.
struct GridMisalignedError : Error {
  using Error::Error;
};

//! Brute-force enumeration would exceed the sequence budget.
struct ComplexityGuardError : Error {
  using Error::Error;
};

//! A policy returned a control outside the admissible hull.
struct InfeasibleSelectionError : Error {
  using Error::Error;
};

//! Configuration parse or validation failure; message names the field path.
struct ConfigError : Error {
  using Error::Error;
};

//! A numerical precondition of a study or check does not hold.
struct PreconditionError : Error {
  using Error::Error;
};

//! Requested builtin problem name does not exist.
struct UnknownBuiltinError : Error {
  using Error::Error;
};

}  // namespace strathjb
