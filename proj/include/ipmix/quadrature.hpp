#pragma once

#include <vector>

#include "ipmix/types.hpp"

namespace ipmix
{

/// Quadrature on the reference d-simplex with nodes in barycentric
/// coordinates. Weights sum to the reference measure 1/d!.
///
/// Rules are Grundmann-Moeller: exact for total degree 2s+1 and available
/// for every dimension, but with signed weights once s >= 1. The cancellation
/// is harmless at the degrees used here (<= 13).
struct QuadratureRule
{
    int dim    = 0;
    int degree = 0; ///< guaranteed exactness degree (>= requested)
    std::vector<Barycentric> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
};

inline constexpr int max_quadrature_degree = 12;

/// Cached rule of exactness >= degree on the reference simplex of dimension
/// dim (1, 2 or 3). Throws ConfigError for degree > max_quadrature_degree.
const QuadratureRule& quadrature_rule(int dim, int degree);

/// The classical (dim+1)-point rule exact for degree 2, one node per vertex
/// on the segment from the barycenter towards it.
const QuadratureRule& symmetric_degree2_rule(int dim);

} // namespace ipmix
