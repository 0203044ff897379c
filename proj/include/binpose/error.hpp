#pragma once

#include <stdexcept>
#include <string>

namespace binpose {

enum class ErrorCode {
  io_error,
  malformed_header,
  truncated_payload,
  zero_dimensions,
  parse_error,
  invalid_pose,
  invalid_bin_spec,
  invalid_config,
  degenerate_parameterization,
  degenerate_plane,
  insufficient_cuts,
  corner_detection_failed,
  degenerate_sampling,
  no_correspondence,
  invalid_camera,
  empty_records,
};

/// Library error carrying a machine-checkable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace binpose
