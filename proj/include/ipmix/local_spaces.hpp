#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "ipmix/mesh.hpp"
#include "ipmix/polynomial.hpp"

namespace ipmix
{

/// Symmetric-matrix-valued polynomial on one element,
///   tau = sum_{i<j} c_ij(lambda) t_ij t_ij^T,
/// with one barycentric coefficient per edge pair (pair_index order).
/// The tangents come from the SimplexGeometry passed to the evaluators.
class SymTensorField
{
  public:
    SymTensorField() = default;
    explicit SymTensorField(int dim);

    /// c * (t_ij t_ij^T).
    static SymTensorField rank_one(int dim, int i, int j, const BarycentricPoly& c);
    /// c * E for a constant symmetric matrix E in Cartesian components.
    static SymTensorField from_matrix(const SimplexGeometry& geom, const SmallMatrix& E,
                                      const BarycentricPoly& c);

    int dim() const { return dim_; }
    const BarycentricPoly& coefficient(int pair) const { return coeffs_[pair]; }
    BarycentricPoly& coefficient(int pair) { return coeffs_[pair]; }
    int degree() const;

    SmallMatrix value(const SimplexGeometry& geom, const Barycentric& lambda) const;
    Point divergence(const SimplexGeometry& geom, const Barycentric& lambda) const;
    /// Cartesian components of div tau as polynomials (one degree lower).
    std::vector<BarycentricPoly> divergence_poly(const SimplexGeometry& geom) const;

    /// Coordinates in the basis {monomial of degree `degree`} x {t_ij t_ij^T}:
    /// entry pair * dim P_degree + monomial index.
    Eigen::VectorXd coordinates(int degree) const;

    SymTensorField& operator+=(const SymTensorField& o);
    SymTensorField& operator*=(double s);
    friend SymTensorField operator*(double s, SymTensorField f) { return f *= s; }

  private:
    int dim_ = 0;
    std::array<BarycentricPoly, 6> coeffs_;
};

/// {t_ij t_ij^T : i < j} in pair_index order.
std::vector<SmallMatrix> rank_one_tensor_basis(const SimplexGeometry& geom);

/// For one local face F_i: canonical_to_local[r] is the element-local vertex
/// index of the r-th vertex of F in canonical order (ascending global ids).
/// Face polynomials shared between elements are defined in canonical order.
struct FaceOrdering
{
    std::array<int, 3> canonical_to_local{-1, -1, -1};
};
using ElementFaceOrdering = std::array<FaceOrdering, 4>;

/// Canonical order = ascending local order (standalone simplex).
ElementFaceOrdering default_face_ordering(int dim);
ElementFaceOrdering face_ordering(const SimplicialMesh& mesh, int element);

/// Face polynomial (canonical variables) rewritten in element variables.
BarycentricPoly lift_face_poly(const BarycentricPoly& p, int dim, const FaceOrdering& ordering);

/// lambda_i lambda_j q t_ij t_ij^T, q over the monomials of P_{k-1}; pair-major.
std::vector<SymTensorField> conforming_div_bubbles(const SimplexGeometry& geom, int k);

/// E_j^{i} q t_ij t_ij^T with q over perp_complement_basis of F_j; pair-major.
std::vector<SymTensorField> nonconforming_div_bubbles(const SimplexGeometry& geom, int k);

/// Weighted dual polynomials phi_{j,s} in span_basis(Hat0I(k, i)):
/// (1/|F_i|) int_{F_i} lambda_j phi_{j,s} phi_{F_i,t} = delta_st.
std::vector<BarycentricPoly> face_dual_polynomials(int dim, int i, int j, int k,
                                                   const FaceOrdering& ordering);

/// phi_{F_i}^{s,l}, index s * dim + l, dual to the face moments of F_i
/// taken with the element-outward normal.
std::vector<SymTensorField> face_bubble_dual_basis(const SimplexGeometry& geom, int i, int k,
                                                   const FaceOrdering& ordering);

/// N_{F_i}^{t,m}(tau) = int_{F_i} (tau nu) . e_m phi_{F_i,t} with the
/// element-outward normal; index t * dim + m. Exact (closed-form integrals).
std::vector<double> face_moments(const SimplexGeometry& geom, const SymTensorField& tau, int i, int k,
                                 const FaceOrdering& ordering);

struct LocalStressBasis
{
    int dim = 0;
    int k   = 0;
    std::vector<SymTensorField> conforming_bubbles;
    std::vector<SymTensorField> nc_bubbles;
    std::array<std::vector<SymTensorField>, 4> face_bubbles;

    /// Face bubbles (face, s, l), then conforming, then nc.
    std::vector<SymTensorField> all() const;
    int size() const;
};

/// All three families on one element. Throws StructuralError if the
/// combined coordinate matrix is rank deficient and validate is set.
LocalStressBasis local_decomposition(const SimplexGeometry& geom, int k, const ElementFaceOrdering& ordering,
                                     bool validate = true);
LocalStressBasis local_decomposition(const SimplexGeometry& geom, int k);

/// Square matrix of all local d.o.f. (face moments of every face, then
/// interior moments against P_{k-1} x t_ij t_ij^T and the nc functionals)
/// applied to `fields`; row = functional, column = field.
Eigen::MatrixXd local_dof_matrix(const SimplexGeometry& geom, int k, const ElementFaceOrdering& ordering,
                                 const std::vector<SymTensorField>& fields);

/// Matrix whose columns are fields[c].coordinates(degree).
Eigen::MatrixXd coordinate_matrix(const std::vector<SymTensorField>& fields, int degree);

} // namespace ipmix
