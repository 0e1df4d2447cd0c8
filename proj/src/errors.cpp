#include "secflow/types.hpp"

namespace secflow {

const char* err_name(Err e) {
  switch (e) {
    case Err::SingularJacobian: return "SingularJacobian";
    case Err::NotASingularity: return "NotASingularity";
    case Err::StepLimitExceeded: return "StepLimitExceeded";
    case Err::BlowUp: return "BlowUp";
    case Err::NearSingularity: return "NearSingularity";
    case Err::NoCrossing: return "NoCrossing";
    case Err::AmbiguousCrossing: return "AmbiguousCrossing";
    case Err::OutOfDomain: return "OutOfDomain";
    case Err::OutOfChart: return "OutOfChart";
    case Err::DegenerateExtension: return "DegenerateExtension";
    case Err::TauNotFound: return "TauNotFound";
    case Err::NotConverged: return "NotConverged";
    case Err::BadConfig: return "BadConfig";
  }
  return "UnknownError";
}

}  // namespace secflow
