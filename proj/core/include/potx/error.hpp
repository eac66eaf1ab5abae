#pragma once

#include <stdexcept>
#include <string>

namespace potx {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text; message names file and line.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Wrong number or names of columns.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Well-formed input violating a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A caller-side precondition was violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

// Auxiliary-norm threshold too high for the event it stands in for.
class LevelTooHighError : public Error {
 public:
  using Error::Error;
};

// Fewer observations than rounds in the betting game.
class GameInfeasibleError : public Error {
 public:
  using Error::Error;
};

// Artifacts that do not belong together (target, level).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace potx
