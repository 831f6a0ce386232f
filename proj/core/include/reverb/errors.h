// Copyright 2026 The ReverB Authors
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

#ifndef REVERB_ERRORS_H_
#define REVERB_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reverb {

// Root of every error thrown by the library. The CLI maps each subclass to
// its own process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Operation called on a value in the wrong form (e.g. unfolded layer passed
// to the addition-only kernel).
class ModeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

// Missing, empty or stale state (forward cache, spike records).
class StateError : public Error {
 public:
  using Error::Error;
};

class FoldError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_ = 0;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"),
        epoch_(epoch) {}

  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace reverb

#endif  // REVERB_ERRORS_H_
