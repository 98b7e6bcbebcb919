#pragma once

#include <array>
#include <cstddef>
#include <utility>

#include <Eigen/Core>

namespace ipmix
{

/// Dynamic-size vector/matrix with stack storage bounded by three spatial
/// dimensions. Used for points, normals and n x n tensor values.
using Point       = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

/// Barycentric coordinates of a point in a simplex of dimension <= 3.
/// Only the first dim+1 entries are meaningful.
using Barycentric = std::array<double, 4>;

inline constexpr int max_dim = 3;

/// Number of unordered vertex pairs (edges) of an n-simplex, i.e. n(n+1)/2.
constexpr int num_pairs(int dim) { return dim * (dim + 1) / 2; }

/// Edges (i, j), i < j, are enumerated lexicographically:
/// (0,1), (0,2), ..., (0,n), (1,2), ...
int pair_index(int i, int j, int dim);
std::pair<int, int> pair_vertices(int pair, int dim);

/// Binomial coefficient C(n, k); zero when k < 0 or k > n.
long long binomial(int n, int k);

/// dim P_k on a simplex of dimension d (zero for k < 0).
inline long long poly_dim(int d, int k) { return k < 0 ? 0 : binomial(d + k, k); }

} // namespace ipmix
