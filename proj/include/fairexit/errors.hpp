/*
 * Copyright 2026 The fair-exit Authors.
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

#ifndef FAIREXIT_ERRORS_HPP_
#define FAIREXIT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fairexit {

// Error taxonomy shared by every module. The CLI maps these onto exit
// statuses (config 2, data 3, checkpoint 4).

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or dimension mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation (empty vector,
// class index out of range, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Operation invoked in the wrong order (e.g. backward before forward).
class StateError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

// A malformed input file. `line` is 1-based, 0 when not applicable.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Input with too little structure for a statistic (empty group, m < 2).
class DegenerateInputError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Every class was skipped while aggregating a fairness metric.
class MetricUndefinedError : public DomainError {
 public:
  using DomainError::DomainError;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Produced a NaN or infinity.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fairexit

#endif  // FAIREXIT_ERRORS_HPP_
