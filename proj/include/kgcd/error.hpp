// Copyright 2026 The kgcd Authors.
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

#ifndef KGCD_ERROR_HPP_
#define KGCD_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgcd {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Configuration or file-system problems. The CLI maps these to exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `line` is 1-based, 0 when not tied to a line.
class LoadError : public Error {
 public:
  LoadError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class NoSuchNode : public Error {
 public:
  explicit NoSuchNode(const std::string& name)
      : Error("no node named '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

class BackendRejected : public Error {
 public:
  BackendRejected(int status, const std::string& body_excerpt)
      : Error("backend rejected request with HTTP " + std::to_string(status) +
              ": " + body_excerpt),
        status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class CapabilityMissing : public Error {
 public:
  using Error::Error;
};

class UnparseableLabel : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class EmptyCandidates : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgcd

#endif  // KGCD_ERROR_HPP_
