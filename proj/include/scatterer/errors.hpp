// Copyright 2026 The scatterer Authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scatterer {

/// Base of every error raised by the library. Carries the process exit code
/// the CLI maps it to.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code)
      : std::runtime_error(what), exit_code_(exit_code) {}

  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// Invalid argument or violated precondition.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what, 2) {}
};

/// Query outside the range covered by a precomputed object.
class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(what, 2) {}
};

/// Evaluation at (or numerically too close to) a pole.
class PoleError : public Error {
 public:
  PoleError(const std::string& what, double pole, std::size_t index)
      : Error(what, 3), pole_(pole), index_(index) {}

  double pole() const noexcept { return pole_; }
  std::size_t index() const noexcept { return index_; }

 private:
  double pole_;
  std::size_t index_;
};

/// Exact integer keys or a size limit would overflow.
class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what) : Error(what, 3) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what, 4) {}
};

}  // namespace scatterer
