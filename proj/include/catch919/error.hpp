#pragma once

#include <stdexcept>
#include <string>

namespace catch919 {

// Base of every error the library throws. The CLI maps these to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structural problems in an input document: missing field, wrong type, unknown key.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// A well-formed value that breaks a model invariant (limits, counts, ranges).
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Something names a joint, cable or finger that does not exist.
class ReferenceError : public Error {
 public:
  using Error::Error;
};

class AssemblyFailure : public Error {
 public:
  using Error::Error;
};

class BranchSingularity : public Error {
 public:
  using Error::Error;
};

class SynthesisError : public Error {
 public:
  using Error::Error;
};

class RankDeficiency : public Error {
 public:
  using Error::Error;
};

class ControlError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace catch919
