#pragma once

#include <stdexcept>
#include <string>

namespace sisr {

// Every failure raised by the library derives from Error. The kind lets the
// CLI map failures onto exit codes without string matching.
enum class ErrorKind {
  kCapacity,      // input too large for the requested enumeration
  kStructural,    // malformed or inconsistent shapes, masks, lengths
  kDomain,        // argument outside the mathematical domain of the op
  kData,          // bad values in otherwise well-formed input (NaN, parse)
  kFlatPayoff,    // all payoffs equal after baseline adjustment
  kUnsupported,   // operation needs a full enumeration, got a sample
  kNonInvertible, // fitted transform is constant, cannot be inverted
  kNumerical,     // factorization failure or similar
  kConfig,        // unknown scheme or option value
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace sisr
