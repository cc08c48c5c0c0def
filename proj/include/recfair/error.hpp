#pragma once

#include <stdexcept>
#include <string>

namespace recfair {

// Error categories align with the CLI exit codes.
enum class ErrorCode : int {
  kConfig = 1,
  kData = 2,
  kRun = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline Error config_error(const std::string& msg) {
  return Error(ErrorCode::kConfig, msg);
}
inline Error data_error(const std::string& msg) {
  return Error(ErrorCode::kData, msg);
}
inline Error run_error(const std::string& msg) {
  return Error(ErrorCode::kRun, msg);
}

}  // namespace recfair
