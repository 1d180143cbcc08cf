#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace raider {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document. `path` is a JSON-pointer-like field path
/// ("objects[1].box.center"); `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::string path = {}, std::size_t line = 0)
      : Error(format(message, path, line)), path_(std::move(path)), line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& message, const std::string& path,
                            std::size_t line) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!path.empty()) out += path + ": ";
    return out + message;
  }

  std::string path_;
  std::size_t line_;
};

/// A document parsed fine but breaks a domain invariant. `subject` names the
/// offending id when there is one.
class ValidationError : public Error {
 public:
  ValidationError(std::string message, std::string subject = {})
      : Error(std::move(message)), subject_(std::move(subject)) {}
  const std::string& subject() const noexcept { return subject_; }

 private:
  std::string subject_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

/// Scripted backend misuse: exhausted script or failed prompt predicate.
class ScriptError : public Error {
 public:
  ScriptError(std::string message, std::size_t step)
      : Error(std::move(message)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class PlanError : public Error {
 public:
  PlanError(const std::string& message, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Command rejected because the target is in the wrong state.
class ConflictError : public Error {
 public:
  using Error::Error;
};

}  // namespace raider
