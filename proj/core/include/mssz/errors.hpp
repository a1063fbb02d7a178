#pragma once

#include <stdexcept>
#include <string>

namespace mssz {

// Error classes map 1:1 onto CLI exit codes so scripts can branch on them.
enum class ErrKind : int {
  usage = 2,            // bad arguments, invalid dims, zero-range relative bound
  io = 3,               // file errors, size mismatch, non-finite input data
  bound_violation = 4,  // |f - fhat| > xi on input that was promised to respect it
  non_convergence = 5,  // iteration caps exhausted / empty edit batch with work left
  corrupt_archive = 6,  // bad magic, truncation, malformed streams
  internal = 7,         // broken invariant (direction-field corruption, cycles)
};

class Error : public std::runtime_error {
 public:
  Error(ErrKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrKind kind_;
};

[[noreturn]] inline void raise(ErrKind kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace mssz
