// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace shardlab {

// Input / configuration failures. The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  enum class Kind {
    UnknownMode,
    UnknownStrategy,
    MissingField,
    NonPositiveSize,
    BadValue,
  };

  ConfigError(Kind kind, std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        kind_(kind),
        field_(std::move(field)) {}

  Kind kind() const { return kind_; }
  const std::string& field() const { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

// Simulator refusals and shape violations.
class SimError : public std::runtime_error {
 public:
  enum class Kind {
    SpecUnsupported,
    BatchNotDivisible,
    DimNotDivisible,
    LayersNotDivisible,
    LengthMismatch,
    ShardShapeMismatch,
  };

  SimError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Composition construction failures. Structural problems found after
// construction are reported as verdicts, not exceptions.
class ComposeError : public std::runtime_error {
 public:
  enum class Kind {
    DegreeMismatch,
    UnsupportedComposition,
  };

  ComposeError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace shardlab
