#include "ipmix/types.hpp"

#include <stdexcept>

namespace ipmix
{

int pair_index(int i, int j, int dim)
{
    if (i > j)
        std::swap(i, j);
    if (i == j || i < 0 || j > dim)
        throw std::out_of_range("pair_index: invalid vertex pair");
    // Pairs starting at r < i contribute dim - r entries each.
    int offset = 0;
    for (int r = 0; r < i; ++r)
        offset += dim - r;
    return offset + (j - i - 1);
}

std::pair<int, int> pair_vertices(int pair, int dim)
{
    for (int i = 0; i < dim; ++i)
    {
        if (pair < dim - i)
            return {i, i + 1 + pair};
        pair -= dim - i;
    }
    throw std::out_of_range("pair_vertices: invalid pair index");
}

long long binomial(int n, int k)
{
    if (k < 0 || n < 0 || k > n)
        return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

} // namespace ipmix
