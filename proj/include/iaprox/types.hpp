#pragma once

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <string>

namespace iaprox {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// A linear solve or quadrature that did not reach its tolerance.
class NumericalError : public std::runtime_error
{
public:
  NumericalError(std::string const &what, double residual)
    : std::runtime_error(what + " (residual " + std::to_string(residual) + ")")
    , residual_{residual}
  {
  }

  double residual() const { return residual_; }

private:
  double residual_;
};

// Invalid experiment or solver configuration.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace iaprox
