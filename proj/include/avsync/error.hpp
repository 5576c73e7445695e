// Copyright 2026 The avsync Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace avsync {

enum class Errc {
  unsupported_format,
  malformed_file,
  range_error,
  argument_error,
  usage_error,
  incomplete_track,
  degenerate_input,
  plan_error,
  undefined_correlation,
  io_error,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::unsupported_format: return "unsupported-format";
    case Errc::malformed_file: return "malformed-file";
    case Errc::range_error: return "range-error";
    case Errc::argument_error: return "argument-error";
    case Errc::usage_error: return "usage-error";
    case Errc::incomplete_track: return "incomplete-track";
    case Errc::degenerate_input: return "degenerate-input";
    case Errc::plan_error: return "plan-error";
    case Errc::undefined_correlation: return "undefined-correlation";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// True for errors caused by bad input data rather than bad invocation.
constexpr bool is_data_error(Errc code) {
  return code != Errc::usage_error && code != Errc::argument_error;
}

}  // namespace avsync
