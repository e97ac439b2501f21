#pragma once

#include <stdexcept>
#include <string>

namespace effmom {

// Error hierarchy shared by the whole engine. Each class corresponds to one
// failure mode a caller can meaningfully react to; the CLI maps them to
// distinct exit codes.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct MalformedSpec : Error {
  using Error::Error;
};
struct AlgebraInconsistent : Error {
  using Error::Error;
};
struct AlgebraMismatch : Error {
  using Error::Error;
};
struct MissingMoment : Error {
  using Error::Error;
};
struct NotOnSurface : Error {
  using Error::Error;
};
struct NoConvergence : Error {
  using Error::Error;
};
struct BranchAmbiguous : Error {
  using Error::Error;
};
struct Inconsistent : Error {
  using Error::Error;
};
struct NoResidualFlow : Error {
  using Error::Error;
};
struct MultipleResidualFlows : Error {
  using Error::Error;
};
struct DegenerateClock : Error {
  using Error::Error;
};
struct StepRejected : Error {
  using Error::Error;
};
struct MonitorTripped : Error {
  using Error::Error;
};
struct QuadratureFail : Error {
  using Error::Error;
};

}  // namespace effmom
