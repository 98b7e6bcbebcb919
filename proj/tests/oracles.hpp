#pragma once

// Independent reference integrators for tests: collapsed (Duffy) tensor
// Gauss-Legendre rules on the reference triangle and tetrahedron, and
// Gauss-Legendre on segments. Nodes come from the Golub-Welsch eigenproblem.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ipmix/types.hpp"

namespace oracle
{

struct Rule1D
{
    std::vector<double> x; ///< nodes in [0, 1]
    std::vector<double> w; ///< weights summing to 1
};

inline Rule1D gauss_legendre(int n)
{
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i)
        j(i, i - 1) = j(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j);
    Rule1D r;
    for (int i = 0; i < n; ++i)
    {
        r.x.push_back(0.5 * (eig.eigenvalues()(i) + 1.0));
        const double v = eig.eigenvectors()(0, i);
        r.w.push_back(v * v);
    }
    return r;
}

/// Integral over the reference d-simplex (d = 1, 2, 3) of f(lambda).
inline double integrate_reference(int d, const std::function<double(const ipmix::Barycentric&)>& f, int n = 12)
{
    const Rule1D g = gauss_legendre(n);
    double sum     = 0.0;
    if (d == 1)
    {
        for (int a = 0; a < n; ++a)
            sum += g.w[a] * f({1.0 - g.x[a], g.x[a], 0.0, 0.0});
        return sum;
    }
    if (d == 2)
    {
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
            {
                const double u = g.x[a], v = g.x[b];
                const double x = u, y = (1.0 - u) * v;
                sum += g.w[a] * g.w[b] * (1.0 - u) * f({1.0 - x - y, x, y, 0.0});
            }
        return sum;
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
            {
                const double u = g.x[a], v = g.x[b], w = g.x[c];
                const double x = u, y = (1.0 - u) * v, z = (1.0 - u) * (1.0 - v) * w;
                sum += g.w[a] * g.w[b] * g.w[c] * (1.0 - u) * (1.0 - u) * (1.0 - v) * f({1.0 - x - y - z, x, y, z});
            }
    return sum;
}

inline double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i)
        r *= i;
    return r;
}

/// Mean over a d-simplex: (1/|T|) int_T f.
inline double mean_reference(int d, const std::function<double(const ipmix::Barycentric&)>& f, int n = 12)
{
    return integrate_reference(d, f, n) * factorial(d);
}

} // namespace oracle
