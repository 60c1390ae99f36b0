// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sturm {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidOrderError : Error {
  using Error::Error;
};

struct InvalidCoefficientError : Error {
  using Error::Error;
};

struct MeshError : Error {
  using Error::Error;
};

/// Problem validation failed (positivity, periodic compatibility, structure).
struct InvalidProblemError : Error {
  using Error::Error;
};

struct SolverPathError : Error {
  using Error::Error;
};

struct SizeError : Error {
  using Error::Error;
};

struct NormalizationError : Error {
  using Error::Error;
};

struct ReferenceUnavailableError : Error {
  using Error::Error;
};

struct GridAlignmentError : Error {
  using Error::Error;
};

/// Root bracketing grid for the dispersion relation appears too coarse.
struct RefinementRequestError : Error {
  using Error::Error;
};

/// Config file error, with 1-based line/column when known.
struct ConfigError : Error {
  ConfigError(const std::string& msg, int line_ = -1, int col_ = -1)
      : Error(msg), line(line_), col(col_) {}
  int line;
  int col;
};

}  // namespace sturm
