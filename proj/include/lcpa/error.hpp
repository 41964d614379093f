#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lcpa {

// Error classes map one-to-one onto CLI exit codes.
enum class ErrorKind {
  range = 10,
  shape = 11,
  contract = 12,
  parameter = 13,
  precision = 14,
  plan = 15,
  parse = 16,
  entropy = 17,
  transport = 18,
  protocol = 19,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::range: return "range";
    case ErrorKind::shape: return "shape";
    case ErrorKind::contract: return "contract";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::precision: return "precision";
    case ErrorKind::plan: return "plan";
    case ErrorKind::parse: return "parse";
    case ErrorKind::entropy: return "entropy";
    case ErrorKind::transport: return "transport";
    case ErrorKind::protocol: return "protocol";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(ErrorKind::range, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::shape, what) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ErrorKind::contract, what) {}
};

class ParameterError : public Error {
 public:
  ParameterError(std::string field, const std::string& what)
      : Error(ErrorKind::parameter, field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class PlanError : public Error {
 public:
  explicit PlanError(const std::string& what) : Error(ErrorKind::plan, what) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error(ErrorKind::parse, "at byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class EntropyError : public Error {
 public:
  explicit EntropyError(const std::string& what) : Error(ErrorKind::entropy, what) {}
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what) : Error(ErrorKind::transport, what) {}
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what) : Error(ErrorKind::protocol, what) {}
};

}  // namespace lcpa
