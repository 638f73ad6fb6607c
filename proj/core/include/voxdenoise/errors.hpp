// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace voxdenoise {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not conform for an operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid model, training or command configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input outside an operation's mathematical domain (negative intensities,
/// degenerate variance, empty reference).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Misuse of the differentiation tape.
class TapeError : public Error {
 public:
  using Error::Error;
};

/// Batch-norm evaluation requested before any running statistics exist.
class StatsError : public Error {
 public:
  using Error::Error;
};

/// Reassembly found a voxel that no patch covers.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// A lesion could not be placed inside the tissue mask.
class PlacementError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or parameters during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// File-system and container-format failures. Subclasses distinguish the
/// ways a container can be malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

class BadMagicError : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedError : public IoError {
 public:
  using IoError::IoError;
};

class LengthMismatchError : public IoError {
 public:
  using IoError::IoError;
};

class FormatError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace voxdenoise
