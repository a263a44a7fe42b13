#pragma once

#include <stdexcept>
#include <string>

namespace tap {

// Failure categories surfaced by the library.  The CLI maps these to exit codes:
// Malformed/Infeasible -> 2, CapExceeded -> 3, CertificateFailure -> 4.
enum class ErrorKind {
    Malformed,          // bad input file / not a tree / bad ids
    Infeasible,         // some tree edge is not coverable by any link
    CapExceeded,        // a guard cap was hit (the message names the cap)
    CertificateFailure, // a dual certificate clause could not be satisfied / verified
    NoSubtreeFound,     // contraction step found no usable semi-closed subtree
    Internal,           // broken invariant inside the library itself
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

// Internal consistency check: unlike asserts these are always on, since the whole
// point of this codebase is that the certified bounds are checked exactly.
inline void check(bool cond, const std::string& msg, ErrorKind kind = ErrorKind::Internal) {
    if (!cond) fail(kind, msg);
}

} // namespace tap
