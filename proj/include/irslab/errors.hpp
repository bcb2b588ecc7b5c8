// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace irslab {

/// Invalid scenario, geometry, or command-line configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The pilot matrix of a least-squares problem does not have full row rank.
class RankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BadMagicError : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedPayloadError : public IoError {
 public:
  using IoError::IoError;
};

class VersionMismatchError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace irslab
