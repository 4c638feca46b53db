#include "gpwave/errors.hpp"

#include <sstream>

namespace gpwave {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::VortexEncountered: return "VortexEncountered";
    case ErrorCode::NotPotential: return "NotPotential";
    case ErrorCode::NotAdmissible: return "NotAdmissible";
    case ErrorCode::NoTravellingWave: return "NoTravellingWave";
    case ErrorCode::QuadratureTooCoarse: return "QuadratureTooCoarse";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::DegenerateBound: return "DegenerateBound";
    case ErrorCode::NotAdmissiblePair: return "NotAdmissiblePair";
    case ErrorCode::FitDomainError: return "FitDomainError";
    case ErrorCode::HorizonViolation: return "HorizonViolation";
    case ErrorCode::WraparoundViolation: return "WraparoundViolation";
    case ErrorCode::ConfigUnknownKey: return "ConfigUnknownKey";
    case ErrorCode::ConfigTypeMismatch: return "ConfigTypeMismatch";
    case ErrorCode::ConfigMissingField: return "ConfigMissingField";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

std::string VortexEncountered::describe(double m, const std::vector<int>& node) {
  std::ostringstream os;
  os << "vortex encountered: min|psi| = " << m << " at node (";
  for (std::size_t i = 0; i < node.size(); ++i) os << (i ? "," : "") << node[i];
  os << ")";
  return os.str();
}

}  // namespace gpwave
