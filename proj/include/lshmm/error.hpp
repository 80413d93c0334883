#ifndef LSHMM_ERROR_HPP
#define LSHMM_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lshmm {

// Base for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument or malformed in-memory data (negative distance, bad spec, ...).
class InputError : public Error {
public:
  explicit InputError(const std::string& what) : Error(what) {}
};

// Malformed file contents. Carries the failure class and a location.
class FormatError : public Error {
public:
  enum class Kind {
    malformed_header,
    dimension_mismatch,
    unknown_symbol,
    bad_value,
  };

  FormatError(Kind kind, std::string path, std::size_t line, std::size_t column,
              const std::string& what)
      : Error(path + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        kind_(kind), path_(std::move(path)), line_(line), column_(column) {}

  Kind kind() const { return kind_; }
  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }      // 1-based
  std::size_t column() const { return column_; }  // 1-based, 0 = whole line

private:
  Kind kind_;
  std::string path_;
  std::size_t line_;
  std::size_t column_;
};

// A probability flushed to zero where the algorithm needs it nonzero.
class UnderflowError : public Error {
public:
  explicit UnderflowError(const std::string& what) : Error(what) {}
};

// Violation of the message-delivery contract (duplicate delivery, count overflow).
class ProtocolError : public Error {
public:
  explicit ProtocolError(const std::string& what) : Error(what) {}
};

// Inconsistent run configuration (e.g. target does not match the graph's observation mask).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace lshmm

#endif  // LSHMM_ERROR_HPP
