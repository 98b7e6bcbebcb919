#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ipmix/types.hpp"

namespace ipmix
{

/// Exponents (m_0, ..., m_d) of a barycentric monomial on a d-simplex.
using MultiIndex = std::array<std::uint8_t, 4>;

/// Scalar polynomial in the barycentric coordinates lambda_0..lambda_d of a
/// d-simplex (element or face). Representations are not unique: the
/// all-zero multi-index stands for the constant 1 = sum of lambdas, so
/// non-homogeneous terms are allowed. Use homogenized() for a canonical form.
class BarycentricPoly
{
  public:
    using Terms = std::map<MultiIndex, double>;

    BarycentricPoly() = default;
    explicit BarycentricPoly(int nvars) : nvars_(nvars) {}

    static BarycentricPoly constant(int nvars, double c);
    static BarycentricPoly variable(int nvars, int l);
    static BarycentricPoly monomial(int nvars, const MultiIndex& m, double c = 1.0);

    int nvars() const { return nvars_; }
    int simplex_dim() const { return nvars_ - 1; }
    int degree() const; ///< -1 for the zero polynomial
    bool is_zero() const { return terms_.empty(); }
    bool is_homogeneous() const;
    const Terms& terms() const { return terms_; }
    double coefficient(const MultiIndex& m) const;

    void add_term(const MultiIndex& m, double c);

    double evaluate(const Barycentric& lambda) const;

    /// Partial derivative with respect to lambda_l, treating the lambdas as
    /// independent variables.
    BarycentricPoly derivative(int l) const;

    /// Same function written with monomials of exactly the given degree
    /// (lower-degree terms multiplied by powers of sum lambda).
    BarycentricPoly homogenized(int degree) const;

    /// Mean value over the simplex, (1/|T|) int_T p. Exact and independent of
    /// the simplex geometry.
    double mean() const;

    /// Drops coefficients with |c| <= tol.
    void prune(double tol = 0.0);

    BarycentricPoly& operator+=(const BarycentricPoly& o);
    BarycentricPoly& operator-=(const BarycentricPoly& o);
    BarycentricPoly& operator*=(double s);

    friend BarycentricPoly operator+(BarycentricPoly a, const BarycentricPoly& b) { return a += b; }
    friend BarycentricPoly operator-(BarycentricPoly a, const BarycentricPoly& b) { return a -= b; }
    friend BarycentricPoly operator*(BarycentricPoly a, double s) { return a *= s; }
    friend BarycentricPoly operator*(double s, BarycentricPoly a) { return a *= s; }
    friend BarycentricPoly operator*(const BarycentricPoly& a, const BarycentricPoly& b);

  private:
    int nvars_ = 0;
    Terms terms_;
};

/// Mean of prod lambda_l^{m_l} over a simplex with nvars vertices:
/// d! prod m_l! / (d + |m|)!.
double monomial_mean(const MultiIndex& m, int nvars);

/// (1/|T|) int_T p q.
double mean_product(const BarycentricPoly& p, const BarycentricPoly& q);

/// Rewrites p with variable r moved to slot map[r] of a polynomial in
/// new_nvars variables; unmapped slots get exponent zero.
BarycentricPoly remap_variables(const BarycentricPoly& p, int new_nvars, std::span<const int> map);

/// Monomial exponent sets of total degree `degree` in nvars variables,
/// descending lexicographic order.
std::vector<MultiIndex> homogeneous_exponents(int nvars, int degree);

struct SpaceSpec
{
    enum class Kind
    {
        Full,  ///< P_k: homogeneous degree-k monomials in all lambdas
        Hat0I, ///< homogeneous degree-k monomials without lambda_i
        HatIJ  ///< monomials of degree <= k without lambda_i, lambda_j
    };

    Kind kind = Kind::Full;
    int k     = 0;
    int i     = -1;
    int j     = -1;

    static SpaceSpec full(int k) { return {Kind::Full, k, -1, -1}; }
    static SpaceSpec hat0i(int k, int i) { return {Kind::Hat0I, k, i, -1}; }
    static SpaceSpec hatij(int k, int i, int j) { return {Kind::HatIJ, k, i, j}; }
};

/// Monomial basis of the space on a simplex of the given dimension
/// (0-based barycentric indices). Empty for k < 0.
std::vector<BarycentricPoly> span_basis(const SpaceSpec& spec, int simplex_dim);

/// Trace on face F_i (lambda_i = 0), written in the face's barycentric
/// coordinates: variable l of the element becomes face variable l (l < i)
/// or l - 1 (l > i).
BarycentricPoly restrict_to_face(const BarycentricPoly& p, int i);

/// Extension from face F_i to the element. With `excluded` = j (element
/// index, j != i) the face coordinate lambda_j^F is eliminated through
/// 1 - sum of the others before substitution; without it the polynomial is
/// homogenized (the lambda_0 = 1 slot) to its degree first.
BarycentricPoly extend_from_face(const BarycentricPoly& p, int i, std::optional<int> excluded);

/// Orthonormal basis of P_k on a face_dim-simplex for (1/|F|) int_F. Obtained
/// by Gram-Schmidt on the monomials of homogeneous_exponents order, so it is
/// deterministic and depends only on the vertex order of the face.
std::vector<BarycentricPoly> orthonormal_face_basis(int face_dim, int k);

/// Basis of the L2 complement of P_k inside P_{k+1} on a face_dim-simplex,
/// orthonormal in the scaled inner product; polynomials are homogeneous of
/// degree k + 1.
std::vector<BarycentricPoly> perp_complement_basis(int face_dim, int k);

} // namespace ipmix
