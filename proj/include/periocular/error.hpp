#pragma once

#include <stdexcept>
#include <string>

namespace periocular {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files: manifests, embeddings, score tables, configs.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Arguments that violate an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Error raised by a pipeline stage; what() is prefixed with "[stage]".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace periocular
