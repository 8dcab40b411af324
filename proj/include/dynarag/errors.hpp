#pragma once

#include <stdexcept>
#include <string>

namespace dynarag {

// Domain error types. Parse-level protocol failures are NOT exceptions
// (they travel as FormatError values and feed the -1 step penalty);
// everything here is a contract or configuration breach.

struct EmptyQuestion : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownNode : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownParent : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct TooManySubQueries : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct AlreadyResolved : std::logic_error {
  using std::logic_error::logic_error;
};

struct MissingContext : std::logic_error {
  using std::logic_error::logic_error;
};

struct UnfilledPlaceholder : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnsupportedRole : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IndexOutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct BackendUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyCorpus : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CorpusParseError : std::runtime_error {
  CorpusParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_number(line) {}
  std::size_t line_number;
};

struct InvalidParams : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct LengthMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Misalignment : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyBatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyTrajectory : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigurationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dynarag
