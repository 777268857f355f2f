// Copyright 2026 The hshrtf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HSHRTF_ERROR_HPP_
#define HSHRTF_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hshrtf {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// An argument is valid in kind but outside the range the implementation
// supports (e.g. orders beyond kMaxOrder).
class RangeError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. Carries the 1-based line number, 0 when the problem
// is not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& what)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : "") + ": " +
              what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Malformed or corrupted binary model file, or an I/O failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The least-squares system could not be solved reliably.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double condition_estimate)
      : Error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace hshrtf

#endif  // HSHRTF_ERROR_HPP_
