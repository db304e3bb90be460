// Copyright 2026 The gumg Authors
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

#ifndef GUMG_ERROR_HPP
#define GUMG_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace gumg {

enum class ErrorCode {
  kNonStochasticRow,
  kNegativeEntry,
  kDimensionMismatch,
  kInfeasibleFloor,
  kSingularSystem,
  kEmptyBatch,
  kZeroProbabilityAction,
  kUnsupportedKind,
  kInnerNotConverged,
  kConfig,
  kInvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonStochasticRow: return "NonStochasticRow";
    case ErrorCode::kNegativeEntry: return "NegativeEntry";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInfeasibleFloor: return "InfeasibleFloor";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kZeroProbabilityAction: return "ZeroProbabilityAction";
    case ErrorCode::kUnsupportedKind: return "UnsupportedKind";
    case ErrorCode::kInnerNotConverged: return "InnerNotConverged";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Every failure surfaced by the library carries a code so callers (and the
// CLI exit path) can branch on the violated invariant.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace gumg

#endif  // GUMG_ERROR_HPP
