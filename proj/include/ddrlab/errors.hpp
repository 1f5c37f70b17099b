#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ddrlab {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A point, ball or path leaves the region where the manifold is defined.
class OutsideDomain : public Error {
 public:
  using Error::Error;
};

// Operation needs a closed-form oracle but the handle is a grid (or vice versa).
class WrongManifoldKind : public Error {
 public:
  using Error::Error;
};

// Minimizing direction is not unique (e.g. antipodal points on the sphere).
class CutLocus : public Error {
 public:
  using Error::Error;
};

class NotSpd : public Error {
 public:
  NotSpd(std::size_t i, std::size_t j, const std::string& what)
      : Error(what), node_i(i), node_j(j) {}
  std::size_t node_i;
  std::size_t node_j;
};

class Underdetermined : public Error {
 public:
  Underdetermined(const std::string& what, double spread)
      : Error(what), direction_spread(spread) {}
  double direction_spread;
};

// Observed data is incompatible with the assumptions of the computation.
class InconsistentData : public Error {
 public:
  using Error::Error;
};

class SampleMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace ddrlab
