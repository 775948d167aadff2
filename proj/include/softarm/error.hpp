// Copyright 2026 The softarm Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace softarm {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pressure command violated channel bounds or the airbag constraint.
class CommandRejected : public Error {
 public:
  using Error::Error;
};

// Tip data that cannot be explained by constant-curvature arcs.
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Orientation outside the projected-angle representation (>= 90 degrees).
class RepresentationRangeError : public Error {
 public:
  using Error::Error;
};

class UnreachableTarget : public Error {
 public:
  using Error::Error;
};

class TrainingFailure : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Pseudoinverse collapsed: every singular value fell below the cutoff.
class NoMotion : public Error {
 public:
  using Error::Error;
};

class OutOfPartition : public Error {
 public:
  using Error::Error;
};

class SingularGeometry : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace softarm
