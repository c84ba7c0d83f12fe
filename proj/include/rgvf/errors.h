// Copyright 2026 The rgvf Authors. All rights reserved.
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

#ifndef RGVF_ERRORS_H_
#define RGVF_ERRORS_H_

#include <stdexcept>
#include <string>

namespace rgvf {

// Invalid parameters or configuration documents.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mismatched vector/matrix/observation dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed serialized input. The message carries line or field context.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular systems, non-finite values, failed residual checks.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A feature that cannot be evaluated from a tabular model.
class UnsupportedFeatureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rgvf

#endif  // RGVF_ERRORS_H_
