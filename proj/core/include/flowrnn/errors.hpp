// Copyright 2026 The flowrnn Authors
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

#ifndef FLOWRNN_ERRORS_HPP_
#define FLOWRNN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace flowrnn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes, channel counts or grids of two operands disagree.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A rotation was requested on a grid with height != width.
class NonSquareGrid : public Error {
 public:
  using Error::Error;
};

class GeneratorNotInSet : public Error {
 public:
  using Error::Error;
};

/// Two lifted operands were built over different generator sets.
class FlowSetMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteGradient : public Error {
 public:
  using Error::Error;
};

/// Malformed binary container or JSON document.
class FormatError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace flowrnn

#endif  // FLOWRNN_ERRORS_HPP_
