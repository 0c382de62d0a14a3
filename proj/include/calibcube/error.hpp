#ifndef CALIBCUBE_ERROR_HPP
#define CALIBCUBE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace calibcube {

enum class Errc {
  BehindCamera,
  NoConvergence,
  InvalidSpec,
  NoMatch,
  AmbiguousMatch,
  SegmentTooShort,
  NoValidMap,
  TooFewPoints,
  DegenerateConfiguration,
  MissingLeds,
  EmptyAfterCrop,
  InsufficientInliers,
  NotOrthogonal,
  IllConditioned,
  UnknownMarkerId,
  ParseError,
  InvariantViolation,
  LedOutOfFrame,
  MarkerOutOfFrame,
  IoError,
  ConfigError,
};

const char* errc_name(Errc code);

/// Single exception type for all pipeline failures; `code()` carries the
/// machine-readable reason, what() a human-readable message.
class CalibError : public std::runtime_error {
 public:
  CalibError(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::BehindCamera: return "BehindCamera";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::NoMatch: return "NoMatch";
    case Errc::AmbiguousMatch: return "AmbiguousMatch";
    case Errc::SegmentTooShort: return "SegmentTooShort";
    case Errc::NoValidMap: return "NoValidMap";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::DegenerateConfiguration: return "DegenerateConfiguration";
    case Errc::MissingLeds: return "MissingLeds";
    case Errc::EmptyAfterCrop: return "EmptyAfterCrop";
    case Errc::InsufficientInliers: return "InsufficientInliers";
    case Errc::NotOrthogonal: return "NotOrthogonal";
    case Errc::IllConditioned: return "IllConditioned";
    case Errc::UnknownMarkerId: return "UnknownMarkerId";
    case Errc::ParseError: return "ParseError";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::LedOutOfFrame: return "LedOutOfFrame";
    case Errc::MarkerOutOfFrame: return "MarkerOutOfFrame";
    case Errc::IoError: return "IoError";
    case Errc::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace calibcube

#endif  // CALIBCUBE_ERROR_HPP
