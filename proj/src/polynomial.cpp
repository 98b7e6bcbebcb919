#include "ipmix/polynomial.hpp"

#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "ipmix/error.hpp"

namespace ipmix
{

namespace
{

int total_degree(const MultiIndex& m)
{
    return std::accumulate(m.begin(), m.end(), 0);
}

double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i)
        r *= i;
    return r;
}

void enumerate(int nvars, int var, int remaining, MultiIndex& cur, std::vector<MultiIndex>& out)
{
    if (var == nvars - 1)
    {
        cur[var] = static_cast<std::uint8_t>(remaining);
        out.push_back(cur);
        cur[var] = 0;
        return;
    }
    for (int e = remaining; e >= 0; --e)
    {
        cur[var] = static_cast<std::uint8_t>(e);
        enumerate(nvars, var + 1, remaining - e, cur, out);
    }
    cur[var] = 0;
}

BarycentricPoly sum_of_variables(int nvars)
{
    BarycentricPoly s(nvars);
    for (int l = 0; l < nvars; ++l)
        s += BarycentricPoly::variable(nvars, l);
    return s;
}

BarycentricPoly power(const BarycentricPoly& base, int e)
{
    BarycentricPoly r = BarycentricPoly::constant(base.nvars(), 1.0);
    for (int i = 0; i < e; ++i)
        r = r * base;
    return r;
}

/// Modified Gram-Schmidt (two passes) of `candidate` against `basis` in the
/// mean inner product. Returns the residual.
BarycentricPoly orthogonalize(BarycentricPoly candidate, const std::vector<BarycentricPoly>& basis)
{
    for (int pass = 0; pass < 2; ++pass)
        for (const BarycentricPoly& b : basis)
            candidate -= mean_product(candidate, b) * b;
    candidate.prune(1e-15);
    return candidate;
}

} // namespace

BarycentricPoly BarycentricPoly::constant(int nvars, double c)
{
    BarycentricPoly p(nvars);
    p.add_term(MultiIndex{}, c);
    return p;
}

BarycentricPoly BarycentricPoly::variable(int nvars, int l)
{
    MultiIndex m{};
    m[l] = 1;
    return monomial(nvars, m);
}

BarycentricPoly BarycentricPoly::monomial(int nvars, const MultiIndex& m, double c)
{
    BarycentricPoly p(nvars);
    p.add_term(m, c);
    return p;
}

int BarycentricPoly::degree() const
{
    int d = -1;
    for (const auto& [m, c] : terms_)
        d = std::max(d, total_degree(m));
    return d;
}

bool BarycentricPoly::is_homogeneous() const
{
    const int d = degree();
    for (const auto& [m, c] : terms_)
        if (total_degree(m) != d)
            return false;
    return true;
}

double BarycentricPoly::coefficient(const MultiIndex& m) const
{
    const auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
}

void BarycentricPoly::add_term(const MultiIndex& m, double c)
{
    if (c == 0.0)
        return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted)
    {
        it->second += c;
        if (it->second == 0.0)
            terms_.erase(it);
    }
}

double BarycentricPoly::evaluate(const Barycentric& lambda) const
{
    double sum = 0.0;
    for (const auto& [m, c] : terms_)
    {
        double v = c;
        for (int l = 0; l < nvars_; ++l)
            for (int e = 0; e < m[l]; ++e)
                v *= lambda[l];
        sum += v;
    }
    return sum;
}

BarycentricPoly BarycentricPoly::derivative(int l) const
{
    BarycentricPoly d(nvars_);
    for (const auto& [m, c] : terms_)
    {
        if (m[l] == 0)
            continue;
        MultiIndex md = m;
        --md[l];
        d.add_term(md, c * m[l]);
    }
    return d;
}

BarycentricPoly BarycentricPoly::homogenized(int degree) const
{
    const BarycentricPoly s = sum_of_variables(nvars_);
    BarycentricPoly out(nvars_);
    for (const auto& [m, c] : terms_)
    {
        const int d = total_degree(m);
        if (d > degree)
            throw std::invalid_argument("homogenized: term degree exceeds target degree");
        out += monomial(nvars_, m, c) * power(s, degree - d);
    }
    return out;
}

double BarycentricPoly::mean() const
{
    double sum = 0.0;
    for (const auto& [m, c] : terms_)
        sum += c * monomial_mean(m, nvars_);
    return sum;
}

void BarycentricPoly::prune(double tol)
{
    for (auto it = terms_.begin(); it != terms_.end();)
        it = std::abs(it->second) <= tol ? terms_.erase(it) : std::next(it);
}

BarycentricPoly& BarycentricPoly::operator+=(const BarycentricPoly& o)
{
    if (nvars_ == 0)
        nvars_ = o.nvars_;
    for (const auto& [m, c] : o.terms_)
        add_term(m, c);
    return *this;
}

BarycentricPoly& BarycentricPoly::operator-=(const BarycentricPoly& o)
{
    if (nvars_ == 0)
        nvars_ = o.nvars_;
    for (const auto& [m, c] : o.terms_)
        add_term(m, -c);
    return *this;
}

BarycentricPoly& BarycentricPoly::operator*=(double s)
{
    if (s == 0.0)
    {
        terms_.clear();
        return *this;
    }
    for (auto& [m, c] : terms_)
        c *= s;
    return *this;
}

BarycentricPoly operator*(const BarycentricPoly& a, const BarycentricPoly& b)
{
    BarycentricPoly r(std::max(a.nvars(), b.nvars()));
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms())
        {
            MultiIndex m;
            for (int l = 0; l < 4; ++l)
                m[l] = static_cast<std::uint8_t>(ma[l] + mb[l]);
            r.add_term(m, ca * cb);
        }
    return r;
}

double monomial_mean(const MultiIndex& m, int nvars)
{
    const int d = nvars - 1;
    double num  = factorial(d);
    for (int l = 0; l < nvars; ++l)
        num *= factorial(m[l]);
    return num / factorial(d + total_degree(m));
}

double mean_product(const BarycentricPoly& p, const BarycentricPoly& q)
{
    return (p * q).mean();
}

BarycentricPoly remap_variables(const BarycentricPoly& p, int new_nvars, std::span<const int> map)
{
    BarycentricPoly out(new_nvars);
    for (const auto& [m, c] : p.terms())
    {
        MultiIndex mm{};
        for (int r = 0; r < p.nvars(); ++r)
            if (m[r] > 0)
                mm[map[r]] = m[r];
        out.add_term(mm, c);
    }
    return out;
}

std::vector<MultiIndex> homogeneous_exponents(int nvars, int degree)
{
    std::vector<MultiIndex> out;
    if (degree < 0)
        return out;
    MultiIndex cur{};
    enumerate(nvars, 0, degree, cur, out);
    return out;
}

std::vector<BarycentricPoly> span_basis(const SpaceSpec& spec, int simplex_dim)
{
    const int nvars = simplex_dim + 1;
    std::vector<BarycentricPoly> out;
    if (spec.k < 0)
        return out;

    switch (spec.kind)
    {
    case SpaceSpec::Kind::Full:
        for (const MultiIndex& m : homogeneous_exponents(nvars, spec.k))
            out.push_back(BarycentricPoly::monomial(nvars, m));
        break;
    case SpaceSpec::Kind::Hat0I:
    {
        if (spec.i < 0 || spec.i >= nvars)
            throw ConfigError("span_basis: excluded index out of range");
        std::vector<int> map;
        for (int l = 0; l < nvars; ++l)
            if (l != spec.i)
                map.push_back(l);
        for (const MultiIndex& m : homogeneous_exponents(nvars - 1, spec.k))
            out.push_back(remap_variables(BarycentricPoly::monomial(nvars - 1, m), nvars, map));
        break;
    }
    case SpaceSpec::Kind::HatIJ:
    {
        if (spec.i < 0 || spec.i >= nvars || spec.j < 0 || spec.j >= nvars || spec.i == spec.j)
            throw ConfigError("span_basis: excluded indices invalid");
        std::vector<int> map;
        for (int l = 0; l < nvars; ++l)
            if (l != spec.i && l != spec.j)
                map.push_back(l);
        const int nv = static_cast<int>(map.size());
        for (int d = 0; d <= spec.k; ++d)
            for (const MultiIndex& m : homogeneous_exponents(nv, d))
                out.push_back(remap_variables(BarycentricPoly::monomial(nv, m), nvars, map));
        break;
    }
    }
    return out;
}

BarycentricPoly restrict_to_face(const BarycentricPoly& p, int i)
{
    BarycentricPoly out(p.nvars() - 1);
    for (const auto& [m, c] : p.terms())
    {
        if (m[i] > 0)
            continue;
        MultiIndex mf{};
        for (int l = 0, r = 0; l < p.nvars(); ++l)
            if (l != i)
                mf[r++] = m[l];
        out.add_term(mf, c);
    }
    return out;
}

BarycentricPoly extend_from_face(const BarycentricPoly& p, int i, std::optional<int> excluded)
{
    const int fnv = p.nvars();
    BarycentricPoly q(fnv);
    if (excluded)
    {
        const int j = *excluded;
        if (j == i || j < 0 || j > fnv)
            throw ConfigError("extend_from_face: excluded index must differ from the face index");
        const int jf = j < i ? j : j - 1;
        // lambda_j^F = 1 - sum of the remaining face coordinates.
        BarycentricPoly sub = BarycentricPoly::constant(fnv, 1.0);
        for (int r = 0; r < fnv; ++r)
            if (r != jf)
                sub -= BarycentricPoly::variable(fnv, r);
        for (const auto& [m, c] : p.terms())
        {
            MultiIndex rest = m;
            rest[jf]        = 0;
            q += BarycentricPoly::monomial(fnv, rest, c) * power(sub, m[jf]);
        }
    }
    else
    {
        q = p.is_zero() ? p : p.homogenized(p.degree());
    }

    std::vector<int> map;
    for (int l = 0; l <= fnv; ++l)
        if (l != i)
            map.push_back(l);
    return remap_variables(q, fnv + 1, map);
}

std::vector<BarycentricPoly> orthonormal_face_basis(int face_dim, int k)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::vector<BarycentricPoly>> cache;
    std::lock_guard lock(mutex);
    if (auto it = cache.find({face_dim, k}); it != cache.end())
        return it->second;

    const int nvars = face_dim + 1;
    std::vector<BarycentricPoly> basis;
    for (const MultiIndex& m : homogeneous_exponents(nvars, k))
    {
        const BarycentricPoly mono = BarycentricPoly::monomial(nvars, m);
        BarycentricPoly r          = orthogonalize(mono, basis);
        const double norm          = std::sqrt(mean_product(r, r));
        if (!(norm > 1e-10 * std::sqrt(mean_product(mono, mono))))
            throw PrecisionError("orthonormal_face_basis: singular Gram matrix");
        basis.push_back(r * (1.0 / norm));
    }
    cache[{face_dim, k}] = basis;
    return basis;
}

std::vector<BarycentricPoly> perp_complement_basis(int face_dim, int k)
{
    const int nvars                        = face_dim + 1;
    std::vector<BarycentricPoly> accepted = orthonormal_face_basis(face_dim, k);
    const std::size_t lower               = accepted.size();
    const std::size_t target              = static_cast<std::size_t>(poly_dim(face_dim, k + 1));

    for (const MultiIndex& m : homogeneous_exponents(nvars, k + 1))
    {
        if (accepted.size() == target)
            break;
        const BarycentricPoly mono = BarycentricPoly::monomial(nvars, m);
        BarycentricPoly r          = orthogonalize(mono, accepted);
        const double norm          = std::sqrt(mean_product(r, r));
        if (norm > 1e-8 * std::sqrt(mean_product(mono, mono)))
            accepted.push_back(r * (1.0 / norm));
    }
    if (accepted.size() != target)
        throw PrecisionError("perp_complement_basis: could not complete the complement");

    std::vector<BarycentricPoly> out;
    for (std::size_t s = lower; s < accepted.size(); ++s)
        out.push_back(accepted[s].homogenized(k + 1));
    return out;
}

} // namespace ipmix
