#include "ipmix/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "ipmix/error.hpp"
#include "ipmix/polynomial.hpp"

namespace ipmix
{

namespace
{

double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i)
        r *= i;
    return r;
}

QuadratureRule grundmann_moeller(int dim, int s)
{
    QuadratureRule rule;
    rule.dim       = dim;
    const int d    = 2 * s + 1;
    rule.degree    = d;
    const int nvar = dim + 1;

    for (int i = 0; i <= s; ++i)
    {
        const double denom = d + dim - 2 * i;
        const double w     = (i % 2 == 0 ? 1.0 : -1.0) * std::pow(2.0, -2 * s) * std::pow(denom, d)
                             / (factorial(i) * factorial(d + dim - i));
        for (const MultiIndex& beta : homogeneous_exponents(nvar, s - i))
        {
            Barycentric p{};
            for (int l = 0; l < nvar; ++l)
                p[l] = (2.0 * beta[l] + 1.0) / denom;
            rule.points.push_back(p);
            rule.weights.push_back(w);
        }
    }
    return rule;
}

} // namespace

const QuadratureRule& quadrature_rule(int dim, int degree)
{
    if (dim < 1 || dim > max_dim)
        throw ConfigError("quadrature_rule: unsupported dimension " + std::to_string(dim));
    if (degree > max_quadrature_degree)
        throw ConfigError("quadrature_rule: unsupported degree " + std::to_string(degree));

    const int s = std::max(degree, 0) / 2;

    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{dim, s}];
    if (!slot)
        slot = std::make_unique<QuadratureRule>(grundmann_moeller(dim, s));
    return *slot;
}

const QuadratureRule& symmetric_degree2_rule(int dim)
{
    if (dim < 1 || dim > max_dim)
        throw ConfigError("symmetric_degree2_rule: unsupported dimension " + std::to_string(dim));
    static const std::array<QuadratureRule, max_dim + 1> rules = [] {
        std::array<QuadratureRule, max_dim + 1> out{};
        for (int n = 1; n <= max_dim; ++n)
        {
            const double b = (n + 2 - std::sqrt(n + 2.0)) / ((n + 1) * (n + 2));
            const double a = 1.0 - n * b;
            QuadratureRule& r = out[n];
            r.dim    = n;
            r.degree = 2;
            for (int v = 0; v <= n; ++v)
            {
                Barycentric p{};
                for (int l = 0; l <= n; ++l)
                    p[l] = l == v ? a : b;
                r.points.push_back(p);
                r.weights.push_back(1.0 / ((n + 1) * factorial(n)));
            }
        }
        return out;
    }();
    return rules[dim];
}

} // namespace ipmix
