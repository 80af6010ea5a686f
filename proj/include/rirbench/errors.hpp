// include/rirbench/errors.hpp

// Copyright 2026 rirbench authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// include/rirbench/errors.hpp

// Copyright 2026 rirbench authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef RIRBENCH_ERRORS_HPP_
#define RIRBENCH_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rirbench {

/// Base of every error the library throws. The CLI maps subclasses onto exit
/// codes: validation-type errors exit 1, everything else exits 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
  virtual const char *kind() const noexcept { return "error"; }
  virtual bool is_validation() const noexcept { return false; }
};

/// Caller broke a documented precondition (bad rate, wrong example count, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
  const char *kind() const noexcept override { return "precondition"; }
  bool is_validation() const noexcept override { return true; }
};

/// A domain-type field is out of range; carries the field name.
class ParameterError : public Error {
 public:
  ParameterError(std::string field, const std::string &what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string &field() const { return field_; }
  const char *kind() const noexcept override { return "parameter"; }
  bool is_validation() const noexcept override { return true; }

 private:
  std::string field_;
};

/// Recognized container holding a codec we do not read.
class FormatError : public Error {
 public:
  using Error::Error;
  const char *kind() const noexcept override { return "format"; }
  bool is_validation() const noexcept override { return true; }
};

/// Malformed or truncated input; offset is the byte position of the problem.
class ParseError : public Error {
 public:
  ParseError(const std::string &what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  explicit ParseError(const std::string &what) : Error(what), offset_(0) {}
  std::size_t offset() const { return offset_; }
  const char *kind() const noexcept override { return "parse"; }
  bool is_validation() const noexcept override { return true; }

 private:
  std::size_t offset_;
};

/// Analysis cannot proceed on this input (silent RIR, too little decay, ...).
class AnalysisError : public Error {
 public:
  using Error::Error;
  const char *kind() const noexcept override { return "analysis"; }
};

/// Endpoint unreachable or returned a failure status.
class TransportError : public Error {
 public:
  TransportError(const std::string &what, int attempts = 1)
      : Error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }
  const char *kind() const noexcept override { return "transport"; }

 private:
  int attempts_;
};

/// Endpoint answered, but the answer is unusable (empty text, bad vector).
class ContentError : public Error {
 public:
  using Error::Error;
  const char *kind() const noexcept override { return "content"; }
};

/// Judge reply without a usable 1..5 score.
class ScoreParseError : public ContentError {
 public:
  ScoreParseError(const std::string &what, std::string raw_reply)
      : ContentError(what), raw_reply_(std::move(raw_reply)) {}
  const std::string &raw_reply() const { return raw_reply_; }
  const char *kind() const noexcept override { return "score_parse"; }

 private:
  std::string raw_reply_;
};

/// Submitted data failed validation; maps to HTTP 422. `ids` names the
/// offending items (missing stimuli, missing assets) when there are any.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string &what, std::vector<std::string> ids = {})
      : Error(what), ids_(std::move(ids)) {}
  const std::vector<std::string> &ids() const { return ids_; }
  const char *kind() const noexcept override { return "validation"; }
  bool is_validation() const noexcept override { return true; }

 private:
  std::vector<std::string> ids_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
  const char *kind() const noexcept override { return "not_found"; }
  bool is_validation() const noexcept override { return true; }
};

class ConflictError : public Error {
 public:
  using Error::Error;
  const char *kind() const noexcept override { return "conflict"; }
  bool is_validation() const noexcept override { return true; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char *kind() const noexcept override { return "io"; }
};

}  // namespace rirbench

#endif  // RIRBENCH_ERRORS_HPP_
