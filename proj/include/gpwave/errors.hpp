#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gpwave {

enum class ErrorCode {
  InvalidArgument,
  NonFinite,
  VortexEncountered,
  NotPotential,
  NotAdmissible,
  NoTravellingWave,
  QuadratureTooCoarse,
  GridTooCoarse,
  DegenerateBound,
  NotAdmissiblePair,
  FitDomainError,
  HorizonViolation,
  WraparoundViolation,
  ConfigUnknownKey,
  ConfigTypeMismatch,
  ConfigMissingField,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class VortexEncountered : public Error {
 public:
  VortexEncountered(double min_modulus, std::vector<int> node)
      : Error(ErrorCode::VortexEncountered, describe(min_modulus, node)),
        min_modulus_(min_modulus),
        node_(std::move(node)) {}
  double min_modulus() const { return min_modulus_; }
  const std::vector<int>& node() const { return node_; }

 private:
  static std::string describe(double m, const std::vector<int>& node);
  double min_modulus_;
  std::vector<int> node_;
};

}  // namespace gpwave
