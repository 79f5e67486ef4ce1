/* Copyright 2026 The SceneForge Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace sceneforge {

// Invalid parameter or argument. `field()` names the offending setting so
// front ends can map it back to a flag.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Malformed input data (empty mask, size mismatch, wrong mask kind).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem or codec failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
std::string range_message(const T& value, const char* range) {
  std::ostringstream os;
  os << "must be in " << range << ", got " << value;
  return os.str();
}

}  // namespace detail

}  // namespace sceneforge
