#pragma once

#include <stdexcept>
#include <string>

namespace abae {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An oracle call would push the ledger past K*N1 + N2 + K.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

class InvalidK : public Error {
 public:
  using Error::Error;
};

/// Every stratum reported p_hat = 0, so the ratio estimator is undefined.
class NoPositiveSamples : public Error {
 public:
  using Error::Error;
};

class InsufficientMatches : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InsufficientPoints : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public ParseError {
 public:
  using ParseError::ParseError;
};

class OracleProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace abae
