#pragma once

#include <stdexcept>
#include <string>

namespace posekit {

/// Root of the library error hierarchy. ValidationError maps to CLI exit
/// code 1, IoError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// -- geometry --------------------------------------------------------------

class DegenerateRotation : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateDirection : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonSquarePixels : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidFrequency : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BehindCamera : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateMesh : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// -- rasters and banks -------------------------------------------------------

class ShapeMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientPool : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyCarving : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CorruptBank : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoFailure : public IoError {
 public:
  using IoError::IoError;
};

// -- refinement, losses, metrics ---------------------------------------------

class EmptyCandidates : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyInput : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NegativeLoss : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// -- mesh ingestion ------------------------------------------------------------

class UnsupportedFormat : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MalformedMesh : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace posekit
