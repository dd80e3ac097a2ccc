#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tae {

/// Base class for every error the toolkit raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input that the caller can fix (malformed files, invalid flags, empty
/// inputs where a value is required). The CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class EmptySequence : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyReference : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyCorpus : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LengthMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ZeroReferenceCount : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A malformed record in a line-oriented file. `line()` is 1-based.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public ParseError {
 public:
  using ParseError::ParseError;
};

class MissingField : public ParseError {
 public:
  using ParseError::ParseError;
};

class IrParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateInput : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingDelta : public ValidationError {
 public:
  explicit MissingDelta(std::string doc_id)
      : ValidationError("no metric delta for document '" + doc_id + "'"),
        doc_id_(std::move(doc_id)) {}
  const std::string& doc_id() const noexcept { return doc_id_; }

 private:
  std::string doc_id_;
};

class InsufficientData : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Failure talking to an embedding or completion endpoint.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, bool retryable)
      : Error(what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

}  // namespace tae
