#pragma once

#include <stdexcept>
#include <string>

namespace qtruss {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid geometry, bad bar indices, under-specified supports, malformed model files.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Bad run configuration: unknown keys, out-of-range values, unknown case ids.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Singular or indefinite systems, failed factorisations, unmet residual tolerances.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Any sampler backend failure.
class SamplerError : public Error {
 public:
  using Error::Error;
};

/// Remote sampler: connection refused, DNS failure, timeout.
class TransportError : public SamplerError {
 public:
  using SamplerError::SamplerError;
};

/// Remote sampler: server answered with a non-200 status.
class HttpError : public SamplerError {
 public:
  using SamplerError::SamplerError;
};

/// Remote sampler: response parsed but violates the protocol (bad shape,
/// inconsistent energies, unsorted or empty sample list).
class ProtocolError : public SamplerError {
 public:
  using SamplerError::SamplerError;
};

}  // namespace qtruss
