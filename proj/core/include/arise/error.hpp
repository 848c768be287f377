#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace arise {

/// Base class for every domain failure raised by the engine. `stage()` names
/// the pipeline stage so command-line diagnostics can report where a run died.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& message);

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Malformed CoNLL-U or JSONL input. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class LoadError : public Error {
 public:
  explicit LoadError(const std::string& message) : Error("load", message) {}
};

/// A caller broke an operation's precondition (mismatched partitions, ...).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& message) : Error("contract", message) {}
};

class ScoringError : public Error {
 public:
  explicit ScoringError(const std::string& message) : Error("scoring", message) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& message) : Error("training", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class GeneratorError : public Error {
 public:
  explicit GeneratorError(const std::string& message) : Error("generator", message) {}
};

}  // namespace arise
