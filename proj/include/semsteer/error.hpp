// Copyright 2026 The semsteer Authors
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

#ifndef SEMSTEER_ERROR_HPP
#define SEMSTEER_ERROR_HPP

#include <stdexcept>
#include <string>

namespace semsteer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A synthetic world is too large to enumerate.
class EnumerationError : public Error {
 public:
  EnumerationError(const std::string& what, double bound) : Error(what), bound_(bound) {}
  double bound() const noexcept { return bound_; }

 private:
  double bound_;
};

/// The network could not be reached after the retry budget was exhausted.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// A backend answered with a payload that violates the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// A similarity scorer failed; carries both texts of the failing pair.
class ScoringError : public Error {
 public:
  ScoringError(const std::string& what, std::string premise, std::string hypothesis)
      : Error(what), premise_(std::move(premise)), hypothesis_(std::move(hypothesis)) {}
  const std::string& premise() const noexcept { return premise_; }
  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string premise_;
  std::string hypothesis_;
};

}  // namespace semsteer

#endif  // SEMSTEER_ERROR_HPP
