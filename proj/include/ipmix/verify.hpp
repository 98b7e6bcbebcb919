#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ipmix/global_spaces.hpp"
#include "ipmix/mesh.hpp"

namespace ipmix
{

/// Singular values below tol * largest count as zero.
inline constexpr double rank_tolerance = 1e-9;

struct RankInfo
{
    int rank    = 0;
    bool stable = true; ///< same rank at 1e-7 and 1e-11
    double smallest_kept  = 0.0; ///< relative
    double largest_dropped = 0.0; ///< relative
};

RankInfo numerical_rank(const Eigen::MatrixXd& m, double tol = rank_tolerance);

struct CheckResult
{
    std::string name;
    bool passed = false;
    std::string expected;
    std::string computed;
    std::string detail;
};

struct VerificationReport
{
    std::vector<CheckResult> checks;

    bool all_passed() const;
    std::string to_text() const;
    std::string to_json() const;
};

/// Vertices of a randomly perturbed reference simplex (deterministic in seed).
std::vector<Point> random_simplex(int dim, std::uint64_t seed);

/// Face moments and interior moments applied to a monomial basis of
/// P_{k+1}(K; S), on the reference simplex and `trials` random ones.
CheckResult check_unisolvency(int n, int k, int trials = 10);

/// Rank of the three-family basis, counts per family.
CheckResult check_local_decomposition(int n, int k, int trials = 10);

/// Face moments of the face bubbles equal the identity (1e-12).
CheckResult check_face_duality(int n, int k, int trials = 10);

/// All face moments of the nc bubbles vanish (1e-12).
CheckResult check_nc_moments(int n, int k, int trials = 10);

/// P_{k+1}(K) = lambda_i lambda_j P_{k-1} + lambda_j E_i P_k(F_i) + lambda_i E_j P_k(F_j) + E_j^i P_k^perp(F_j)
/// for every pair (i, j), plus the symmetry of the last summand in (i, j).
CheckResult check_polynomial_decomposition(int n, int k);

/// span{div tau : tau conforming bubble} = R_k^perp inside P_k(K; R^n).
CheckResult check_div_bubble_range(int n, int k);

/// Normal-trace dimensions on one face: rigid motions, P_min(k,1)(F; R^n),
/// the face bubbles and the H^1 face bubbles.
struct TraceDimensions
{
    int rigid        = 0;
    int p01          = 0;
    int face_bubbles = 0;
    int h1_bubbles   = 0;
};
TraceDimensions trace_dimensions(int n, int k);
CheckResult check_trace_dimensions(int n, int k);

/// Two-element patch: patchwise P_{k+1}(S) fields with continuous normal
/// trace on the shared face and zero normal trace on all other faces.
struct PatchTrace
{
    int normal_component = 0; ///< dim of {nu . tau nu |_F}
    int vector_trace     = 0; ///< dim of {tau nu |_F}
    int p1_moment_rank   = 0; ///< rank of the moments against P_1(F; R^n)
};
/// `vertices` holds the shared face first (n points), then the two opposite
/// vertices. Throws ConfigError when the patch violates the hyperplane
/// assumption.
PatchTrace conforming_patch_trace(int n, int k, const std::vector<Point>& vertices);
std::vector<Point> generic_patch(int n);
CheckResult check_conforming_trace_bound(int n, int k);

/// Dof counts of the dofmaps against the closed forms and F + F_i = (n+1) T.
CheckResult check_space_dimensions(const SimplicialMesh& mesh, int k);

/// Face-bubble span and continuous P1(S) span intersect trivially on a
/// strongly regular two-element patch.
CheckResult check_direct_sum(int n);

/// Full column rank of the S2 basis on the uniform mesh with m subdivisions.
CheckResult check_s2_independence(int n, int m);

/// beta with beta^2 = min eig of (B S^{-1} B^T, M_V), S the star-norm Gram
/// matrix of the stress space and M_V the displacement mass.
double inf_sup_constant(const SimplicialMesh& mesh, int k, SpaceKind kind, double eta);
CheckResult check_inf_sup(int n, int k, SpaceKind kind, const std::vector<int>& levels, double eta = 1.0);

/// Face-bubble norms on congruent elements of meshes m and 2m.
struct ScalingRatios
{
    double l2      = 0.0;
    double div     = 0.0;
    double trace   = 0.0;
    double expected_l2    = 0.0;
    double expected_div   = 0.0;
    double expected_trace = 0.0;
};
ScalingRatios face_bubble_scaling(int n, int m);
CheckResult check_scaling(int n);

/// The complete structural suite.
VerificationReport run_all_checks();

} // namespace ipmix
