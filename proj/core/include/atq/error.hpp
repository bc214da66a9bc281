// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace atq {

/// Base class of every error raised by the library. The CLI maps each
/// subclass onto a distinct process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (JSON syntax, STIX bundle shape, bad numbers).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input parsed but breaks a structural or referential invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A campaign, node, tactic or technique id that does not exist.
class UnknownEntityError : public Error {
 public:
  using Error::Error;
};

/// A leaf lacks a value for the requested metric.
class MissingAttributionError : public Error {
 public:
  using Error::Error;
};

/// cATM formula could not be parsed, bound, or evaluated.
class FormulaError : public Error {
 public:
  FormulaError(const std::string& what, std::size_t position = npos)
      : Error(position == npos ? what
                               : what + " (at position " +
                                     std::to_string(position) + ")"),
        position_(position) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace atq
