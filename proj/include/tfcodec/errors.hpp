// Copyright 2026 The TFCodec Authors
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

#ifndef TFCODEC_ERRORS_HPP_
#define TFCODEC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace tfcodec {

// Machine-readable failure category; the CLI maps these to exit codes and
// prints them as "error[<category>]: <message>" on stderr.
enum class ErrorCategory {
  kUsage,    // bad arguments / unknown mode
  kIo,       // file not readable/writable
  kFormat,   // malformed artifact or bitstream, hash/version mismatch
  kData,     // valid format but unusable content (empty dataset, short input)
  kInternal  // invariant violation
};

const char* error_category_name(ErrorCategory c);
int error_category_exit_code(ErrorCategory c);

class CodecError : public std::runtime_error {
 public:
  CodecError(ErrorCategory cat, const std::string& msg)
      : std::runtime_error(msg), category_(cat) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

inline CodecError usage_error(const std::string& m) { return {ErrorCategory::kUsage, m}; }
inline CodecError io_error(const std::string& m) { return {ErrorCategory::kIo, m}; }
inline CodecError format_error(const std::string& m) { return {ErrorCategory::kFormat, m}; }
inline CodecError data_error(const std::string& m) { return {ErrorCategory::kData, m}; }
inline CodecError internal_error(const std::string& m) { return {ErrorCategory::kInternal, m}; }

}  // namespace tfcodec

#endif  // TFCODEC_ERRORS_HPP_
