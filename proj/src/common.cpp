#include <cstdlib>
#include <string>

#include <omp.h>

#include "s5dscr/cube.hpp"
#include "s5dscr/error.hpp"
#include "s5dscr/parallel.hpp"
#include "s5dscr/tensor.hpp"

namespace s5dscr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::Corrupt: return "Corrupt";
    case ErrorCode::Io: return "Io";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::DegeneratePca: return "DegeneratePCA";
    case ErrorCode::TooFewTiles: return "TooFewTiles";
    case ErrorCode::NotScalar: return "NotScalar";
    case ErrorCode::TapeConsumed: return "TapeConsumed";
    case ErrorCode::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

std::string to_string(const Dims4& d) {
  return "(" + std::to_string(d.b) + ", " + std::to_string(d.c) + ", " + std::to_string(d.h) + ", " +
         std::to_string(d.w) + ")";
}

std::string_view to_string(Spectrometer s) {
  switch (s) {
    case Spectrometer::UV: return "UV";
    case Spectrometer::UVIS: return "UVIS";
    case Spectrometer::NIR: return "NIR";
    case Spectrometer::SWIR: return "SWIR";
  }
  return "?";
}

void set_threads(int n) {
  if (n <= 0) {
    if (const char* env = std::getenv("DSCR_THREADS")) n = std::atoi(env);
  }
  if (n > 0) omp_set_num_threads(n);
}

int threads() { return omp_get_max_threads(); }

}  // namespace s5dscr
