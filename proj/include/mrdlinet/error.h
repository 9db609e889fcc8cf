/*
 * Copyright 2026 The MRD-LiNet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MRDLINET_ERROR_H_
#define MRDLINET_ERROR_H_

#include <stdexcept>
#include <string>

namespace mrdlinet {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto exit codes (config-like errors -> 2, I/O errors -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced where only finite values are allowed.
class NumericError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. backward() on a non-scalar.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain rule (bad box, bad label, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed input text (XML, CSV, JSON).
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Batch-norm inference requested before any running statistics exist.
class UninitializedStatisticsError : public Error {
 public:
  using Error::Error;
};

}  // namespace mrdlinet

#endif  // MRDLINET_ERROR_H_
