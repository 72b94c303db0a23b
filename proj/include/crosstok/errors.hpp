#pragma once
#include <stdexcept>
#include <string>

namespace crosstok {

enum class Errc {
  TooShort,
  MissingCount,
  NoContexts,
  EmptyCorpus,
  UnseenSequence,
  UnknownToken,
  SchemaVersionMismatch,
  CorruptModel,
  AllTrialsFailed,
  InvalidConfig,
  IoError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::TooShort: return "TooShort";
    case Errc::MissingCount: return "MissingCount";
    case Errc::NoContexts: return "NoContexts";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::UnseenSequence: return "UnseenSequence";
    case Errc::UnknownToken: return "UnknownToken";
    case Errc::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case Errc::CorruptModel: return "CorruptModel";
    case Errc::AllTrialsFailed: return "AllTrialsFailed";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace crosstok
