#pragma once

#include <stdexcept>

namespace idmkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input table is missing required columns or is otherwise malformed.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// No vehicles left after filtering.
class EmptySceneError : public Error {
 public:
  using Error::Error;
};

// Trajectory shorter than the requested window.
class InsufficientLengthError : public Error {
 public:
  using Error::Error;
};

// Non-positive gap while a lead vehicle is present.
class InvalidGapError : public Error {
 public:
  using Error::Error;
};

// Lane centerline does not extend far enough for the lookahead point.
class LaneExhaustedError : public Error {
 public:
  using Error::Error;
};

// Trajectories of different length where aligned frames are required.
class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

// Parameter store is empty, unreadable, or k exceeds its size.
class StoreError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace idmkit
