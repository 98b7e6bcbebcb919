#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "ipmix/global_spaces.hpp"
#include "ipmix/mesh.hpp"
#include "ipmix/quadrature.hpp"

namespace ipmix
{

using SparseMatrix = Eigen::SparseMatrix<double>;
using VectorField  = std::function<Point(const Point&)>;

struct Material
{
    double mu     = 0.5;
    double lambda = 1.0;
    int dim       = 2;

    /// Throws ConfigError unless mu > 0 and 2 mu + n lambda > 0.
    void validate() const;
};

/// A sigma = (sigma - lambda / (2 mu + n lambda) tr(sigma) I) / (2 mu).
SmallMatrix compliance_apply(const Material& material, const SmallMatrix& sigma);

/// Quadrature exactness degrees used for order-k stress spaces.
struct QuadratureDegrees
{
    static int mass(int k) { return 2 * (k + 2); }
    static int face(int k) { return 2 * k + 4; }
    static int load(int k) { return k + 6; }
    static int error(int k) { return 2 * k + 8; }
};

/// Physical tabulation of one element's stress basis on a quadrature rule.
struct ElementTabulation
{
    std::vector<SmallMatrix> values;     ///< [point * nfields + field], sign applied
    std::vector<Point> divergences;      ///< same layout
    std::vector<double> weights;         ///< physical weights
    std::vector<Point> points;           ///< physical points
    int nfields = 0;
};

ElementTabulation tabulate_stress(const SimplexGeometry& geom, const ElementStressDofs& dofs, int degree);
ElementTabulation tabulate_stress(const SimplexGeometry& geom, const ElementStressDofs& dofs,
                                  const QuadratureRule& rule);

/// Length h_F in the penalty weight h_F^{-1}.
enum class PenaltyLength
{
    FaceDiameter,      ///< diameter of F
    MinEdge,           ///< shortest edge of the mesh, same for every face
    MaxElementDiameter ///< largest element diameter of the mesh, same for every face
};

PenaltyLength parse_penalty_length(const std::string& name); ///< face | min-edge | max-diameter
std::string to_string(PenaltyLength length);

/// h_F for every face of the mesh.
std::vector<double> penalty_lengths(const SimplicialMesh& mesh, PenaltyLength length);

/// Sign-adjusted local fields of adjacent element `side` (0 or 1) of face f,
/// evaluated at the nodes of a rule on the face given in canonical face
/// coordinates; layout [point * nfields + field].
std::vector<SmallMatrix> face_trace_values(const SimplicialMesh& mesh, const StressSpace& space, int f, int side,
                                           const QuadratureRule& rule);

/// (A sigma, tau) summed over elements.
SparseMatrix assemble_compliance(const SimplicialMesh& mesh, const StressSpace& space, const Material& material);

/// sum_{F interior} h_F^{-1} int_F [sigma] . [tau] (unweighted by eta).
SparseMatrix assemble_penalty(const SimplicialMesh& mesh, const StressSpace& space,
                              PenaltyLength length = PenaltyLength::FaceDiameter);

/// Plain L2 (Frobenius) mass matrix of the stress space.
SparseMatrix assemble_stress_mass(const SimplicialMesh& mesh, const StressSpace& space);

/// sum_K int_K div sigma . div tau.
SparseMatrix assemble_div_gram(const SimplicialMesh& mesh, const StressSpace& space);

/// a_h = compliance + eta * penalty.
SparseMatrix assemble_a(const SimplicialMesh& mesh, const StressSpace& space, const Material& material,
                        double eta, PenaltyLength length = PenaltyLength::FaceDiameter);

/// Rows: displacement dofs, columns: stress dofs; entries sum_K int_K div tau . v.
SparseMatrix assemble_b(const SimplicialMesh& mesh, const StressSpace& stress, const DisplacementSpace& disp);

/// (f, v) for every displacement basis function.
Eigen::VectorXd assemble_rhs(const SimplicialMesh& mesh, const DisplacementSpace& disp, const VectorField& f,
                             int degree = -1);

/// L2 mass matrix of the displacement space (block diagonal).
SparseMatrix assemble_displacement_mass(const SimplicialMesh& mesh, const DisplacementSpace& disp);

/// [[A, B^T], [B, 0]] [sigma; u] = [0; (f, v)].
struct SaddlePointSystem
{
    SparseMatrix A;
    SparseMatrix B;
    SparseMatrix mass_v; ///< displacement mass, used by preconditioners and norms
    Eigen::VectorXd rhs; ///< load over displacement dofs
    double eta = 1.0;

    int num_stress() const { return static_cast<int>(A.rows()); }
    int num_displacement() const { return static_cast<int>(B.rows()); }
    int size() const { return num_stress() + num_displacement(); }

    SparseMatrix full_matrix() const;
    Eigen::VectorXd full_rhs() const;
};

struct Discretization
{
    StressSpace stress;
    DisplacementSpace displacement;
};

Discretization build_discretization(const SimplicialMesh& mesh, int k, SpaceKind kind);

SaddlePointSystem build_saddle_system(const SimplicialMesh& mesh, const Discretization& disc,
                                      const Material& material, double eta, const VectorField& f,
                                      PenaltyLength length = PenaltyLength::FaceDiameter);

/// Writes the blocks as Matrix Market files <prefix>_A.mtx, _B.mtx, _rhs.mtx.
void export_matrix_market(const SaddlePointSystem& system, const std::string& prefix);

} // namespace ipmix
