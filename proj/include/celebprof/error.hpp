// Copyright 2026 The Authors.
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

namespace celebprof {

// Broad failure classes. The CLI maps them onto exit codes 1, 2 and 3.
enum class ErrorKind { kConfig, kData, kInternal };

// Every library failure carries a kind and a short stable code such as
// "schema", "cardinality" or "dimension" so callers and tests can branch on it
// without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

inline Error config_error(std::string code, const std::string& message) {
  return Error(ErrorKind::kConfig, std::move(code), message);
}
inline Error data_error(std::string code, const std::string& message) {
  return Error(ErrorKind::kData, std::move(code), message);
}
inline Error internal_error(std::string code, const std::string& message) {
  return Error(ErrorKind::kInternal, std::move(code), message);
}

}  // namespace celebprof
