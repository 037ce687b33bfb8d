/*
 * Copyright 2026 The RML Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RML_CORE_ERROR_HPP
#define RML_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace rml {

enum class ErrorCode {
  Syntax,
  DuplicateChannel,
  MultipleTargets,
  MissingTarget,
  UnknownAtom,
  InvalidProgram,
  VariableBudgetExceeded,
  ShapeMismatch,
  UnknownChannel,
  UninitializedSource,
  AllRatesZero,
  NonMonotonicTimestamp,
  EmptyFeatureClass,
  MalformedRecord,
  InvalidArgument,
  Io,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure with a source position (1-based line/column).
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, int line, int column, const std::string& message)
      : Error(code, std::to_string(line) + ":" + std::to_string(column) +
                        ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string message) {
  throw Error(code, std::move(message));
}

}  // namespace rml

#endif  // RML_CORE_ERROR_HPP
