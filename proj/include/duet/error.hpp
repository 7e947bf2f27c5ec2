//===-- error.hpp - Exception hierarchy ----------------------------------===//

#pragma once

#include <stdexcept>
#include <string>

namespace duet {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Assembly syntax or resolution failure; line is 1-based.
class AsmError : public Error {
public:
  AsmError(unsigned line, const std::string &msg)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  unsigned line() const { return line_; }

private:
  unsigned line_;
};

class DecodeError : public Error {
public:
  using Error::Error;
};

class WidthError : public Error {
public:
  using Error::Error;
};

class UnboundVariable : public Error {
public:
  explicit UnboundVariable(const std::string &name)
      : Error("unbound variable '" + name + "'"), name_(name) {}
  const std::string &name() const { return name_; }

private:
  std::string name_;
};

/// Predicate DSL failure. pos is a byte offset into the source text.
class ParseError : public Error {
public:
  ParseError(size_t pos, const std::string &msg)
      : Error("parse error at " + std::to_string(pos) + ": " + msg), pos_(pos) {}
  size_t pos() const { return pos_; }

private:
  size_t pos_;
};

/// Query needs more variable bits than the solver is allowed to handle.
class BudgetExceeded : public Error {
public:
  BudgetExceeded(unsigned needed, unsigned limit)
      : Error("solver budget exceeded: query needs " + std::to_string(needed) +
              " input bits, limit is " + std::to_string(limit)),
        needed_(needed), limit_(limit) {}
  unsigned needed() const { return needed_; }
  unsigned limit() const { return limit_; }

private:
  unsigned needed_, limit_;
};

/// Harness configuration problem. path is a JSON-pointer-like location.
class ConfigError : public Error {
public:
  ConfigError(const std::string &path, const std::string &msg)
      : Error(path + ": " + msg), path_(path) {}
  const std::string &path() const { return path_; }

private:
  std::string path_;
};

class ExplorationLimit : public Error {
public:
  using Error::Error;
};

} // namespace duet
