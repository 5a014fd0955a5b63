#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace xps {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite or out-of-domain evaluation. `coordinate` is the offending
// input index, or npos when the failure is not attributable to one slot.
class DomainError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit DomainError(const std::string& what, std::size_t coordinate = npos)
      : Error(what), coordinate_(coordinate) {}

  std::size_t coordinate() const { return coordinate_; }

 private:
  std::size_t coordinate_;
};

class ImplicitSolveError : public Error {
 public:
  using Error::Error;
};

class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class DegenerateTimeError : public Error {
 public:
  using Error::Error;
};

class SuperluminalError : public Error {
 public:
  using Error::Error;
};

class CollisionChartError : public Error {
 public:
  using Error::Error;
};

class UnphysicalMapError : public Error {
 public:
  using Error::Error;
};

class DegenerateFibreError : public Error {
 public:
  using Error::Error;
};

class CoefficientSingularityError : public Error {
 public:
  CoefficientSingularityError(const std::string& what, double t, double q2)
      : Error(what), t_(t), q2_(q2) {}
  double t() const { return t_; }
  double q2() const { return q2_; }

 private:
  double t_;
  double q2_;
};

}  // namespace xps
