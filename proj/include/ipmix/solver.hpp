#pragma once

#include <string>

#include <Eigen/Core>

#include "ipmix/assembly.hpp"

namespace ipmix
{

enum class SolverMethod
{
    Automatic, ///< direct factorization, MINRES only if the factorization runs out of memory
    Direct,
    Minres
};

struct SolverOptions
{
    double tolerance        = 1e-10; ///< relative residual ||K z - b|| / ||b||
    SolverMethod method     = SolverMethod::Automatic;
    int max_iterations      = 20000;
};

struct Solution
{
    Eigen::VectorXd sigma;
    Eigen::VectorXd u;
    double residual = 0.0;
    std::string method;
};

/// Throws SolverError when the matrix is singular, the factorization fails,
/// or the requested residual is not reached.
Solution solve_saddle(const SaddlePointSystem& system, const SolverOptions& options = {});

} // namespace ipmix
