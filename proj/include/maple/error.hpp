// Copyright 2026 The maple-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace maple {

enum class ErrorCode {
  dimension,
  parameter,
  configuration,
  contract,
  vocabulary,
  format,
  version,
  insufficiency,
  invariant_violation,
  training,
  oracle,
  io,
  undefined_metric,
};

std::string_view error_code_name(ErrorCode code);

/// Base of every error raised by the library. `code()` is stable and is what
/// the CLI maps onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define MAPLE_DEFINE_ERROR(Name, Code)                                \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& message) : Error(Code, message) {} \
  }

MAPLE_DEFINE_ERROR(DimensionError, ErrorCode::dimension);
MAPLE_DEFINE_ERROR(ParameterError, ErrorCode::parameter);
MAPLE_DEFINE_ERROR(ConfigError, ErrorCode::configuration);
MAPLE_DEFINE_ERROR(ContractError, ErrorCode::contract);
MAPLE_DEFINE_ERROR(VocabularyError, ErrorCode::vocabulary);
MAPLE_DEFINE_ERROR(FormatError, ErrorCode::format);
MAPLE_DEFINE_ERROR(VersionError, ErrorCode::version);
MAPLE_DEFINE_ERROR(InsufficiencyError, ErrorCode::insufficiency);
MAPLE_DEFINE_ERROR(InvariantViolation, ErrorCode::invariant_violation);
MAPLE_DEFINE_ERROR(TrainingError, ErrorCode::training);
MAPLE_DEFINE_ERROR(OracleError, ErrorCode::oracle);
MAPLE_DEFINE_ERROR(IoError, ErrorCode::io);
MAPLE_DEFINE_ERROR(UndefinedMetricError, ErrorCode::undefined_metric);

#undef MAPLE_DEFINE_ERROR

}  // namespace maple
