// Copyright 2026 The vlprep Authors.
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

namespace vlprep {

/// Bad input or configuration. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or truncated files. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sequence exceeds a token limit. Carries which limit and by how much.
class LimitError : public ValidationError {
 public:
  LimitError(std::string limit_name, long long limit, long long actual)
      : ValidationError(limit_name + " token limit exceeded by " +
                        std::to_string(actual - limit) + " (" +
                        std::to_string(actual) + " > " +
                        std::to_string(limit) + ")"),
        limit_name_(std::move(limit_name)),
        limit_(limit),
        actual_(actual) {}

  const std::string& limit_name() const { return limit_name_; }
  long long limit() const { return limit_; }
  long long actual() const { return actual_; }
  long long excess() const { return actual_ - limit_; }

 private:
  std::string limit_name_;
  long long limit_;
  long long actual_;
};

}  // namespace vlprep
