#pragma once

#include <stdexcept>
#include <string>

namespace whamkit {

// Base of every error raised by the library. Each subclass maps to one
// process exit code in the CLI (see README).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class BehindCamera : public Error {
 public:
  BehindCamera(const std::string& what, int frame, int landmark)
      : Error(what), frame_(frame), landmark_(landmark) {}
  int frame() const { return frame_; }
  int landmark() const { return landmark_; }

 private:
  int frame_;
  int landmark_;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace whamkit
