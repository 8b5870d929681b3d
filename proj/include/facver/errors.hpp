#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace facver {

// Base for all library errors. `category` is a stable machine-readable tag
// ("domain", "config", "transport", ...) used in reports and exit paths.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}

  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error("domain", m) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

struct CalibrationError : Error {
  explicit CalibrationError(const std::string& m) : Error("calibration", m) {}
};

struct IngestionError : Error {
  explicit IngestionError(const std::string& m) : Error("ingestion", m) {}
};

struct CapabilityError : Error {
  explicit CapabilityError(const std::string& m) : Error("capability", m) {}
};

struct OutputError : Error {
  explicit OutputError(const std::string& m) : Error("output", m) {}
};

// Unmatched request against the scripted backend. Always a test/fixture bug,
// never retried and never turned into fabricated output.
struct ScriptMissError : Error {
  explicit ScriptMissError(const std::string& m) : Error("script-miss", m) {}
};

struct DanglingCitationError : Error {
  explicit DanglingCitationError(const std::string& m) : Error("dangling-citation", m) {}
};

class TransportError : public Error {
 public:
  TransportError(const std::string& m, int status, bool retryable)
      : Error("transport", m), status_(status), retryable_(retryable) {}

  int status() const { return status_; }
  bool retryable() const { return retryable_; }

 private:
  int status_;
  bool retryable_;
};

// Model output did not match the required format. `stage` names the pipeline
// step ("decomposition", "verification", "critique", "revision", "judgment")
// and `raw` carries the offending response for diagnostics.
class ParseError : public Error {
 public:
  ParseError(std::string stage, const std::string& message, std::string raw = "")
      : Error("parse", stage + ": " + message), stage_(std::move(stage)), raw_(std::move(raw)) {}

  const std::string& stage() const { return stage_; }
  const std::string& raw_response() const { return raw_; }

 private:
  std::string stage_;
  std::string raw_;
};

}  // namespace facver
