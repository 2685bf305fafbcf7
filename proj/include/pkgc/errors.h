// Copyright 2026 The pkgc Authors.
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

#ifndef PKGC_ERRORS_H_
#define PKGC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace pkgc {

// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorClass {
  kGeneric = 1,
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string &what)
      : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }

 private:
  ErrorClass cls_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string &w) : Error(ErrorClass::kConfig, w) {}
};

// Malformed files, unknown users, inconsistent corpora.
struct DataError : Error {
  explicit DataError(const std::string &w) : Error(ErrorClass::kData, w) {}
};

struct ParseError : DataError {
  ParseError(const std::string &w, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + w), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct MissingUserError : DataError {
  explicit MissingUserError(const std::string &user)
      : DataError("unknown user key: " + user) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string &w) : Error(ErrorClass::kNumeric, w) {}
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string &w)
      : Error(ErrorClass::kGeneric, w) {}
};

struct StateError : Error {
  explicit StateError(const std::string &w) : Error(ErrorClass::kGeneric, w) {}
};

}  // namespace pkgc

#endif  // PKGC_ERRORS_H_
