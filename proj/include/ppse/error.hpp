#pragma once

#include <stdexcept>
#include <string>

namespace ppse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A precondition stated in a function contract was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A real value does not fit the fixed-point codec's representable range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Ciphertexts of different fixed-point scales were combined additively.
class ScaleMismatch : public Error {
 public:
  using Error::Error;
};

/// A plaintext multiplication would exceed the scale budget of the key.
/// The ciphertext must be refreshed (decrypted and re-encrypted at scale 1).
class ScaleOverflow : public Error {
 public:
  using Error::Error;
};

/// Prime search gave up; retrying with another seed is expected to succeed.
class KeygenTimeout : public Error {
 public:
  using Error::Error;
};

/// The LP backend could not decide the problem (iteration limit, breakdown).
class LpIndeterminate : public Error {
 public:
  using Error::Error;
};

/// A set that must be nonempty turned out to be empty.
class EmptySet : public Error {
 public:
  using Error::Error;
};

/// A protocol round could not complete (missing messages, bad payloads).
class ProtocolStall : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace ppse
