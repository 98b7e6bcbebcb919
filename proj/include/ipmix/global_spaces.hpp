#pragma once

#include <string>
#include <vector>

#include "ipmix/local_spaces.hpp"
#include "ipmix/mesh.hpp"

namespace ipmix
{

enum class SpaceKind
{
    S1, ///< fully nonconforming: face bubbles + conforming and nc div-bubbles
    S2  ///< minimal nonconforming (k = 0): interior face bubbles + continuous P1
};

SpaceKind parse_space_kind(const std::string& name);
std::string to_string(SpaceKind kind);

/// Element-local view of a global stress space: local field c contributes
/// sign[c] * fields[c] to global dof dofs[c].
struct ElementStressDofs
{
    std::vector<int> dofs;
    std::vector<double> signs;
    std::vector<SymTensorField> fields;
};

class StressSpace
{
  public:
    SpaceKind kind() const { return kind_; }
    int k() const { return k_; }
    int dim() const { return dim_; }
    int num_dofs() const { return num_dofs_; }
    int num_elements() const { return static_cast<int>(elements_.size()); }
    /// Dofs attached to faces (S1: all faces; S2: interior faces).
    int num_face_dofs() const { return num_face_dofs_; }

    const ElementStressDofs& element(int e) const { return elements_[e]; }

  private:
    friend StressSpace build_space_s1(const SimplicialMesh&, int);
    friend StressSpace build_space_s2(const SimplicialMesh&, int);

    SpaceKind kind_ = SpaceKind::S1;
    int k_          = 0;
    int dim_        = 0;
    int num_dofs_   = 0;
    int num_face_dofs_ = 0;
    std::vector<ElementStressDofs> elements_;
};

/// Face dofs first (face id, t, m), then per element its conforming and nc
/// bubbles. Face dofs use the global normal of the face table; the element
/// whose outward normal is -nu_F carries sign -1.
StressSpace build_space_s1(const SimplicialMesh& mesh, int k);

/// k = 0 only, strongly regular meshes only. Interior face dofs (face id, m),
/// then n(n+1)/2 Lagrange dofs per vertex (vertex id, component a <= b).
StressSpace build_space_s2(const SimplicialMesh& mesh, int k = 0);

StressSpace build_stress_space(const SimplicialMesh& mesh, int k, SpaceKind kind);

/// Closed-form dimension counts.
long long s1_dimension(int dim, int k, long long num_elements, long long num_interior_faces);
long long s2_dimension(int dim, long long num_vertices, long long num_interior_faces);

/// Discontinuous P_k(K; R^n). Dof of (element e, component m, monomial a)
/// is e * block + m * dim P_k + a, monomials from span_basis(Full(k)).
class DisplacementSpace
{
  public:
    DisplacementSpace() = default;
    DisplacementSpace(int dim, int k, int num_elements);

    int dim() const { return dim_; }
    int k() const { return k_; }
    int num_dofs() const { return block_ * num_elements_; }
    int block_size() const { return block_; }
    int scalar_size() const { return static_cast<int>(monomials_.size()); }
    int dof(int e, int m, int a) const { return e * block_ + m * scalar_size() + a; }
    const std::vector<BarycentricPoly>& monomials() const { return monomials_; }

  private:
    int dim_          = 0;
    int k_            = 0;
    int num_elements_ = 0;
    int block_        = 0;
    std::vector<BarycentricPoly> monomials_;
};

DisplacementSpace build_displacement_space(const SimplicialMesh& mesh, int k);

/// Vector polynomial field on one element, one barycentric polynomial per
/// Cartesian component.
using VectorPoly = std::vector<BarycentricPoly>;

/// Basis of R_k(K): translations, plus rotations x -> (x_b e_a - x_a e_b)
/// when k >= 1.
std::vector<VectorPoly> rigid_motion_basis(const SimplexGeometry& geom, int k);

/// Symmetric gradient of a vector polynomial field at a point.
SmallMatrix symmetric_gradient(const SimplexGeometry& geom, const VectorPoly& v, const Barycentric& lambda);

} // namespace ipmix
