#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace regrow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (e.g. a rule that is not in the grammar).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Text input (regex, grammar, dataset) could not be parsed. `position` is a
// zero-based character offset, or a one-based line number for line formats.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at " + std::to_string(position) + ")"), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class InputError : public Error {
 public:
  using Error::Error;
};

// The recognition model grows grammars from positive strings only.
class PositivesRequired : public Error {
 public:
  PositivesRequired() : Error("at least one positive example is required to grow a grammar") {}
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class DeadEnd : public Error {
 public:
  using Error::Error;
};

class EmptyLanguage : public Error {
 public:
  using Error::Error;
};

}  // namespace regrow
