#pragma once

#include <stdexcept>
#include <string>

namespace perfhom {

enum class ErrorKind {
  invalid_argument,
  infeasible,
  validation,
  mesh,
  solver,
  io,
  unsupported,
};

/// Base exception for the library. The C API maps `kind()` onto status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error invalid_argument(const std::string& what) { return {ErrorKind::invalid_argument, what}; }
inline Error infeasible(const std::string& what) { return {ErrorKind::infeasible, what}; }
inline Error validation_error(const std::string& what) { return {ErrorKind::validation, what}; }
inline Error mesh_error(const std::string& what) { return {ErrorKind::mesh, what}; }
inline Error solver_error(const std::string& what) { return {ErrorKind::solver, what}; }
inline Error io_error(const std::string& what) { return {ErrorKind::io, what}; }
inline Error unsupported(const std::string& what) { return {ErrorKind::unsupported, what}; }

}  // namespace perfhom
