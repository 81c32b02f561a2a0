#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace s5dscr {

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  TooSmall,
  BadMagic,
  Truncated,
  HeaderMismatch,
  NonFinite,
  VersionMismatch,
  Corrupt,
  Io,
  DegenerateRange,
  DegeneratePca,
  TooFewTiles,
  NotScalar,
  TapeConsumed,
  NumericFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define S5DSCR_CHECK(cond, code, msg)            \
  do {                                           \
    if (!(cond)) throw ::s5dscr::Error((code), (msg)); \
  } while (0)

}  // namespace s5dscr
