// Copyright 2026 The Granola Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GRANOLA_ERRORS_H_
#define GRANOLA_ERRORS_H_

#include <stdexcept>
#include <string>

namespace granola {

// Broad error classes. Each maps onto one CLI exit code.
enum class ErrorKind {
  kConfig,    // exit 1
  kData,      // exit 2
  kProvider,  // exit 3
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorKind::kConfig, message) {}
};

// A prompt template references a slot the caller did not provide.
class TemplateError : public ConfigError {
 public:
  explicit TemplateError(std::string placeholder)
      : ConfigError("missing prompt slot '{" + placeholder + "}'"),
        placeholder_(std::move(placeholder)) {}

  const std::string& placeholder() const { return placeholder_; }

 private:
  std::string placeholder_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorKind::kData, message) {}
};

// A line of a JSONL file could not be parsed. Line numbers are 1-based.
class ParseError : public DataError {
 public:
  ParseError(int line, const std::string& message)
      : DataError("line " + std::to_string(line) + ": " + message),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

// A record parsed but violates a dataset invariant.
class ValidationError : public DataError {
 public:
  ValidationError(std::string field, std::string message)
      : DataError("invalid field '" + field + "': " + message),
        field_(std::move(field)),
        detail_(std::move(message)) {}

  const std::string& field() const { return field_; }
  const std::string& detail() const { return detail_; }

  // Same error with the offending input line appended.
  ValidationError AtLine(int line) const {
    return ValidationError(field_,
                           detail_ + " (line " + std::to_string(line) + ")");
  }

 private:
  std::string field_;
  std::string detail_;
};

class IoError : public DataError {
 public:
  explicit IoError(const std::string& message) : DataError(message) {}
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& message, bool retryable)
      : Error(ErrorKind::kProvider, message), retryable_(retryable) {}

  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

// Network or server-side failure; worth retrying.
class TransportError : public ProviderError {
 public:
  explicit TransportError(const std::string& message)
      : ProviderError(message, /*retryable=*/true) {}
};

// The provider answered but declined to produce a continuation.
class RefusalError : public ProviderError {
 public:
  explicit RefusalError(const std::string& message)
      : ProviderError(message, /*retryable=*/false) {}
};

// Rethrows `error` as its error class with `prefix` prepended to the
// message.
[[noreturn]] inline void RethrowWithPrefix(const Error& error,
                                           const std::string& prefix) {
  const std::string message = prefix + error.what();
  switch (error.kind()) {
    case ErrorKind::kConfig:
      throw ConfigError(message);
    case ErrorKind::kData:
      throw DataError(message);
    case ErrorKind::kProvider: {
      const auto* provider = dynamic_cast<const ProviderError*>(&error);
      throw ProviderError(message, provider && provider->retryable());
    }
  }
  throw Error(error.kind(), message);
}

inline int ExitCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return 1;
    case ErrorKind::kData:
      return 2;
    case ErrorKind::kProvider:
      return 3;
  }
  return 2;
}

}  // namespace granola

#endif  // GRANOLA_ERRORS_H_
