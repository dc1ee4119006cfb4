// ----------------------------------------------------------------------------
// Copyright 2026 The rulprior Authors
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
// ----------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace rulprior {

enum class ErrorKind {
  Domain,      // argument outside an operation's domain
  Parse,       // malformed input text
  Validation,  // inconsistent data or artifacts
  Numeric,     // non-convergence, NaN
  Query,       // empty neighbor sets
  Config,      // invalid configuration
  Io,          // missing or unwritable files
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace rulprior
