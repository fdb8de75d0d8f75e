#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gbpf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Exponential-cost routine asked for more than its cap.
class SizeGuardExceeded : public Error {
 public:
  using Error::Error;
};

class NegativeGapProbability : public Error {
 public:
  NegativeGapProbability(char table, std::int64_t k, double value);

  char table() const noexcept { return table_; }
  std::int64_t k() const noexcept { return k_; }
  double value() const noexcept { return value_; }

 private:
  char table_;
  std::int64_t k_;
  double value_;
};

class RejectionCapExceeded : public Error {
 public:
  using Error::Error;
};

// A finite set cannot carry the requested mass fraction.
class NotRepresentable : public Error {
 public:
  using Error::Error;
};

// Quadrature failed to converge, usually a divergent moment.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

}  // namespace gbpf
