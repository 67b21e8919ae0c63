/*
 * Copyright 2026 The TFMN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TFMN_ERROR_HPP_
#define TFMN_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tfmn {

enum class ErrorKind {
  kInvalidArgument,
  kIo,
  kMalformedLine,
  kUnknownToken,
  kEmptyNetwork,
  kEmptyGraph,
  kDegenerateGraph,
  kInvalidPartition,
  kMTooLarge,
  kMMismatch,
  kSchemaMismatch,
  kConfig,
  kMissingUpstreamArtifact,
  kStageFailure,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kMalformedLine: return "MalformedLine";
    case ErrorKind::kUnknownToken: return "UnknownToken";
    case ErrorKind::kEmptyNetwork: return "EmptyNetwork";
    case ErrorKind::kEmptyGraph: return "EmptyGraph";
    case ErrorKind::kDegenerateGraph: return "DegenerateGraph";
    case ErrorKind::kInvalidPartition: return "InvalidPartition";
    case ErrorKind::kMTooLarge: return "MTooLarge";
    case ErrorKind::kMMismatch: return "MMismatch";
    case ErrorKind::kSchemaMismatch: return "SchemaMismatch";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kMissingUpstreamArtifact: return "MissingUpstreamArtifact";
    case ErrorKind::kStageFailure: return "StageFailure";
  }
  return "Unknown";
}

// Every failure raised by the library carries a kind so callers can branch
// on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tfmn

#endif  // TFMN_ERROR_HPP_
