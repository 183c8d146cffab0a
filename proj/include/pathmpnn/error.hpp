// Copyright 2026 The PathMPNN Authors.
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

#ifndef PATHMPNN_ERROR_HPP_
#define PATHMPNN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pmpnn {

// Bad input: malformed records, files, configs or shape mismatches.
// The CLI maps this family to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failures during computation (non-finite values, degenerate geometry,
// enumeration blow-up). The CLI maps this family to exit code 2.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateGeometryError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Thrown when a single root has more simple paths than the configured cap.
class PathLimitError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace pmpnn

#endif  // PATHMPNN_ERROR_HPP_
