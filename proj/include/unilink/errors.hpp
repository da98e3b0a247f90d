#pragma once

#include <stdexcept>
#include <string>

namespace unilink {

// Runtime failure while executing an otherwise valid request (IO, malformed
// data, mismatched artifacts). Maps to exit code 1 in the CLI.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or usage: bad flag values, missing input paths,
// out-of-range parameters. Maps to exit code 2 in the CLI.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed record in a line-delimited file; carries the 1-based line number.
class ParseError : public RuntimeError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : RuntimeError(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace unilink
