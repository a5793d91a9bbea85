// Copyright 2026 The MSIC Authors
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

#ifndef MSIC_ERRORS_H_
#define MSIC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace msic {

// Base for all codec failures. The CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or configuration values that can never work together.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input files (bad magic, unsupported version, bad PNG, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Streams that parse but are internally inconsistent (truncated, bad checksum).
class CorruptionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// The container was produced with a different model than the one loaded.
class ModelMismatchError : public Error {
 public:
  using Error::Error;
};

// Training diverged (non-finite loss or gradient).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace msic

#endif  // MSIC_ERRORS_H_
