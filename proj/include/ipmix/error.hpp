#pragma once

#include <stdexcept>
#include <string>

namespace ipmix
{

class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Degenerate simplices, invalid meshes, malformed mesh files.
class GeometryError : public Error
{
  public:
    using Error::Error;
};

/// Numerically singular Gram systems in basis construction.
class PrecisionError : public Error
{
  public:
    using Error::Error;
};

/// Rank deficiency in a construction that must be full rank.
class StructuralError : public Error
{
  public:
    using Error::Error;
};

/// Unsupported or inconsistent configuration (orders, spaces, meshes).
class ConfigError : public Error
{
  public:
    using Error::Error;
};

class IoError : public Error
{
  public:
    using Error::Error;
};

class SolverError : public Error
{
  public:
    SolverError(const std::string& what, double residual)
      : Error(what + " (relative residual " + std::to_string(residual) + ")"), residual_(residual)
    {
    }

    double residual() const { return residual_; }

  private:
    double residual_;
};

} // namespace ipmix
