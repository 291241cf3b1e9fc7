// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace spirk {

// Root of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Invalid user-facing configuration (stage count, dimension, topology, flags).
class ConfigError : public Error
{
public:
  using Error::Error;
};

// Vector/matrix sizes that do not fit together.
class DimensionError : public Error
{
public:
  using Error::Error;
};

// Zero pivot in a triangular factorization; carries the 0-based pivot index.
class FactorizationError : public Error
{
public:
  FactorizationError(const std::string &what, int pivot) : Error(what), pivot_(pivot) {}
  int pivot() const noexcept { return pivot_; }

private:
  int pivot_;
};

// Eigenvalue iteration failed or the spectrum is degenerate.
class SpectralError : public Error
{
public:
  using Error::Error;
};

// NaN/Inf encountered, or an unusable spectral estimate.
class NumericalError : public Error
{
public:
  using Error::Error;
};

// Collective or point-to-point contract violated in the simulated runtime
// (mismatched payloads, missing participants, receive without a matching send).
class ProtocolError : public Error
{
public:
  using Error::Error;
};

}  // namespace spirk
