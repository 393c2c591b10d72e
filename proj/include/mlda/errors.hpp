#pragma once

#include <stdexcept>
#include <string>

namespace mlda {

/// The objective became non-finite while iterating; carries the offending iteration.
class divergence_error : public std::runtime_error {
 public:
  explicit divergence_error(int iteration)
      : std::runtime_error("solver diverged: objective became non-finite at iteration " +
                           std::to_string(iteration)),
        iteration(iteration) {}
  int iteration;
};

/// The mean-difference projection along the direction vanishes; the intercept
/// of the classification rule is undefined along this direction.
class degenerate_direction_error : public std::runtime_error {
 public:
  degenerate_direction_error()
      : std::runtime_error("degenerate direction: (mu2 - mu1)^T vec(B) is zero") {}
};

/// The data admit no usable operation (e.g. an all-zero correlation matrix or
/// a class split that leaves a class empty).
class degenerate_data_error : public std::runtime_error {
 public:
  explicit degenerate_data_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mlda
