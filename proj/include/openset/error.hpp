/* Copyright 2026 The openset-eval Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace openset {

// Base of every error raised by the toolkit. The CLI maps ValidationError
// (and subclasses) to exit code 1 and IoError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad caller-supplied argument (budget 0, empty grid, zero denominator, ...).
class InvalidArgument : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Malformed input row. `line` is 1-based and counts every physical line,
// including the version comment and header.
class ParseError : public ValidationError {
 public:
  ParseError(std::string path, std::size_t line, const std::string& message)
      : ValidationError(path + ":" + std::to_string(line) + ": " + message),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace openset
