#pragma once

#include <stdexcept>
#include <string>

namespace ccwl {

enum class ErrorCode {
  InvalidArgument,
  InvalidState,
  SizeLimit,
  Validation,
  Parse,
  CertificateInvalid,
  NoSeparator,
  Io,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidState: return "invalid-state";
    case ErrorCode::SizeLimit: return "size-limit";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::CertificateInvalid: return "certificate-invalid";
    case ErrorCode::NoSeparator: return "no-separator";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ccwl
