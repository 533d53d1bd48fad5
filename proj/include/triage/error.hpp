#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace triage {

// Base of every error the engine throws. Callers that only care about
// "something failed" catch this; the CLI and HTTP layers dispatch on the
// concrete type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Unknown warning id, rule id, etc.
class NotFound : public Error {
 public:
  using Error::Error;
};

// Operation refers to state that has since changed (e.g. a rule dropped by
// a refinement).
class Conflict : public Error {
 public:
  using Error::Error;
};

// A rule id that was valid earlier but was dropped by a refinement.
class StaleRule : public Conflict {
 public:
  using Conflict::Conflict;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersion : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what,
                      std::optional<std::size_t> byte_offset = std::nullopt)
      : Error(byte_offset ? what + " (at byte " + std::to_string(*byte_offset) + ")"
                          : what),
        offset_(byte_offset) {}

  std::optional<std::size_t> byte_offset() const noexcept { return offset_; }

 private:
  std::optional<std::size_t> offset_;
};

}  // namespace triage
