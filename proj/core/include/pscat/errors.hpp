// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace pscat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gaussian envelope sums to (numerically) zero on the grid, so beta is undefined.
class DegenerateEnvelope : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// Backward requested without a tape from a gradient-mode forward.
class TapeMissing : public Error {
 public:
  using Error::Error;
};

class SizeMismatch : public Error {
 public:
  using Error::Error;
};

class StrengthOutOfRange : public Error {
 public:
  using Error::Error;
};

class DegenerateBatch : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

/// Input data could not be read or is malformed.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Loss or parameters became non-finite during optimization.
class NumericalDivergence : public Error {
 public:
  using Error::Error;
};

}  // namespace pscat
