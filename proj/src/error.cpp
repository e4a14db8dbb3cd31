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

#include "pairjudge/error.hpp"

namespace pj {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kSandbox: return "sandbox";
    case ErrorKind::kMalformedRecord: return "malformed_record";
    case ErrorKind::kUnknownLabel: return "unknown_label";
    case ErrorKind::kSpec: return "spec";
    case ErrorKind::kCompatibility: return "compatibility";
    case ErrorKind::kSampling: return "sampling";
    case ErrorKind::kTemplate: return "template";
    case ErrorKind::kPlayback: return "playback";
    case ErrorKind::kExtraction: return "extraction";
    case ErrorKind::kGeneration: return "generation";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kQuestionGen: return "question_gen";
    case ErrorKind::kVerdict: return "verdict";
    case ErrorKind::kUndefinedMetric: return "undefined_metric";
    case ErrorKind::kInput: return "input";
  }
  return "unknown";
}

ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kInvalidArgument:
      return ErrorCategory::kConfig;
    case ErrorKind::kIo:
    case ErrorKind::kTransport:
    case ErrorKind::kSandbox:
      return ErrorCategory::kInfrastructure;
    default:
      return ErrorCategory::kData;
  }
}

}  // namespace pj
