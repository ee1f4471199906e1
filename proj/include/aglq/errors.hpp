#pragma once

#include <stdexcept>
#include <string>

namespace aglq {

// Input data could not be parsed or is inconsistent (CSV, JSON, dimensions).
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A sample was too small or constant for the requested estimate.
class degenerate_sample_error : public std::runtime_error {
 public:
  explicit degenerate_sample_error(const std::string& msg)
      : std::runtime_error(msg) {}
};

// A linear system was numerically singular; carries the offending eigenvalue.
class ill_conditioned_error : public std::runtime_error {
 public:
  ill_conditioned_error(const std::string& msg, double min_eigen)
      : std::runtime_error(msg + " (min eigenvalue " +
                           std::to_string(min_eigen) + ")"),
        min_eigenvalue(min_eigen) {}
  double min_eigenvalue;
};

// Backtracking drove the step size below representable range.
class step_size_error : public std::runtime_error {
 public:
  explicit step_size_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace aglq
