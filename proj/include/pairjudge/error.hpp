// Copyright 2026 The pairjudge Authors
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
#include <string_view>

namespace pj {

/// Broad failure class. Determines the CLI exit code and the C API status.
enum class ErrorCategory {
  kConfig = 2,
  kInfrastructure = 3,
  kData = 4,
};

/// Specific failure reason. Several kinds share one category.
enum class ErrorKind {
  kConfig,
  kInvalidArgument,
  kIo,
  kTransport,
  kSandbox,
  kMalformedRecord,
  kUnknownLabel,
  kSpec,
  kCompatibility,
  kSampling,
  kTemplate,
  kPlayback,
  kExtraction,
  kGeneration,
  kValidation,
  kQuestionGen,
  kVerdict,
  kUndefinedMetric,
  kInput,
};

std::string_view to_string(ErrorKind kind);
ErrorCategory category_of(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace pj
