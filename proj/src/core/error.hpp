// Copyright 2026 The beatvox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BEATVOX_CORE_ERROR_HPP_
#define BEATVOX_CORE_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace beatvox {

enum class ErrorKind {
  kInvalidArgument,
  kIo,
  kFormat,        // malformed file or document
  kVersion,       // model document version not supported
  kOnsetCount,    // training clip did not yield the declared number of events
  kState,         // workflow-order violation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by training when the onset detector disagrees with the class plan.
class OnsetCountError : public Error {
 public:
  OnsetCountError(std::size_t found, std::size_t expected)
      : Error(ErrorKind::kOnsetCount,
              "expected " + std::to_string(expected) + " onsets, found " +
                  std::to_string(found)),
        found_(found),
        expected_(expected) {}
  std::size_t found() const { return found_; }
  std::size_t expected() const { return expected_; }

 private:
  std::size_t found_;
  std::size_t expected_;
};

}  // namespace beatvox

#endif  // BEATVOX_CORE_ERROR_HPP_
