#pragma once

#include <stdexcept>
#include <string>

namespace foliage {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonSymmetricInput : Error { using Error::Error; };
struct OutsideDomain : Error { using Error::Error; };
struct InvalidSpec : Error { using Error::Error; };
struct DegenerateImmersion : Error { using Error::Error; };
struct MismatchedLeaf : Error { using Error::Error; };
struct CaseNotApplicable : Error { using Error::Error; };
struct NotConformal : Error { using Error::Error; };
struct PreconditionFailed : Error { using Error::Error; };
struct LeavesNotEquicurved : Error { using Error::Error; };
struct HypothesisNotMet : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// A computed quantity violated one of the pinned numerical contracts.
struct NumericalContractViolation : Error { using Error::Error; };

}  // namespace foliage
