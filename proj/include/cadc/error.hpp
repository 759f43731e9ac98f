#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cadc {

enum class Errc {
  invalid_argument,
  invalid_shape,
  invalid_geometry,
  invalid_params,
  allocation_infeasible,
  conflict_detected,
  trace_overflow,
  not_enough_cells,
  diverged_training,
  empty_input,
  corrupt_file,
  io_error,
};

std::string_view to_string(Errc code);

/// Domain error raised by every module. The code identifies the failure
/// class; the message carries the details.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// A file failed to parse. `offset` is the byte position where parsing
/// stopped.
class CorruptFileError : public Error {
 public:
  CorruptFileError(std::uint64_t offset, const std::string& what)
      : Error(Errc::corrupt_file,
              what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Two contour windows in the same tracing element were hit by one pixel.
class ConflictError : public Error {
 public:
  ConflictError(int round, int te, int first_contour, int second_contour,
                std::int64_t scan_index);

  int round;
  int te;
  int first_contour;
  int second_contour;
  std::int64_t scan_index;
};

}  // namespace cadc
