#pragma once

#include <stdexcept>
#include <string>

namespace qstore {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two kets (or a ket and an operator) live in different spaces.
class IncompatibleSpaces : public Error {
 public:
  using Error::Error;
};

/// A result would leave the configured excitation / Fock sector.
class SectorOverflow : public Error {
 public:
  using Error::Error;
};

class ZeroNorm : public Error {
 public:
  using Error::Error;
};

class NotNormalized : public Error {
 public:
  using Error::Error;
};

/// Bad argument to a constructor or operation (precondition violation).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Fixed-step integration lost more norm than the configured bound.
class StepTooCoarse : public Error {
 public:
  using Error::Error;
};

}  // namespace qstore
