#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ipmix/assembly.hpp"
#include "ipmix/solver.hpp"

namespace ipmix
{

/// Closed-form displacement u vanishing on the boundary of the unit
/// square/cube, with sigma = 2 mu eps(u) + lambda tr(eps(u)) I and f = div sigma.
struct ManufacturedCase
{
    int dim = 2;
    Material material;
    std::function<Point(const Point&)> u;
    std::function<SmallMatrix(const Point&)> grad_u; ///< (a, b) = d u_a / d x_b
    std::function<SmallMatrix(const Point&)> sigma;
    VectorField f;
};

/// 2D: u = (e^{x-y} x y (1-x)(1-y), sin(pi x) sin(pi y)).
/// 3D: u = (16, 32, 64) x(1-x) y(1-y) z(1-z).
ManufacturedCase manufactured_case(int dim, const Material& material);
ManufacturedCase manufactured_case(int dim);

struct ErrorRecord
{
    int m            = 0;
    double err_u     = 0.0; ///< ||u - u_h||
    double err_sigma = 0.0; ///< ||sigma - sigma_h||
    double err_div   = 0.0; ///< ||div_h (sigma - sigma_h)||
    double err_jump  = 0.0; ///< (sum_{F interior} ||[sigma_h]||_F^2)^{1/2}
    double err_star  = 0.0; ///< star norm of sigma - sigma_h
    double penalty   = 0.0; ///< sum_F h_F^{-1} ||[sigma_h]||_F^2
    long long dim_v     = 0;
    long long dim_sigma = 0;

    bool operator==(const ErrorRecord&) const = default;
};

/// Element rule for the volume error integrals.
enum class ErrorQuadrature
{
    Accurate, ///< Grundmann-Moeller of degree 2k + 8
    Degree2   ///< symmetric (n+1)-point rule exact for degree 2
};

ErrorQuadrature parse_error_quadrature(const std::string& name); ///< accurate | degree2
std::string to_string(ErrorQuadrature rule);

/// Reported jump column: ||[sigma_h]|| or sqrt(eta) ||[sigma_h]||.
enum class JumpNorm
{
    Plain,
    EtaWeighted
};

struct ErrorOptions
{
    PenaltyLength penalty_length = PenaltyLength::FaceDiameter;
    ErrorQuadrature quadrature   = ErrorQuadrature::Accurate;
    JumpNorm jump_norm           = JumpNorm::Plain;
};

ErrorRecord evaluate_errors(const SimplicialMesh& mesh, const Discretization& disc, const Solution& solution,
                            const ManufacturedCase& mcase, double eta, const ErrorOptions& options = {});

struct StudyConfig
{
    int dim         = 2;
    int k           = 0;
    SpaceKind space = SpaceKind::S1;
    double eta      = 1.0;
    std::vector<int> levels;
    Material material;
    PenaltyLength penalty_length     = PenaltyLength::FaceDiameter;
    ErrorQuadrature error_quadrature = ErrorQuadrature::Accurate;
    JumpNorm jump_norm               = JumpNorm::Plain;
    SolverOptions solver;

    bool operator==(const StudyConfig& o) const
    {
        return dim == o.dim && k == o.k && space == o.space && eta == o.eta && levels == o.levels
               && material.mu == o.material.mu && material.lambda == o.material.lambda
               && penalty_length == o.penalty_length && error_quadrature == o.error_quadrature
               && jump_norm == o.jump_norm;
    }
};

/// Default penalty: 0.1 for 3D S2, 1 otherwise.
double default_eta(int dim, SpaceKind space);

/// Conventions of the reference uniform-grid tables: h_F is the grid
/// spacing for k = 0 and the element diameter for k = 1, k = 0 errors are
/// integrated with the degree-2 rule, and the jump column carries sqrt(eta).
StudyConfig table_config(int dim, int k, SpaceKind space, std::vector<int> levels);

struct ConvergenceReport
{
    StudyConfig config;
    std::vector<ErrorRecord> records;

    /// log(e_{i-1} / e_i) / log(m_i / m_{i-1}); empty for the first level.
    std::optional<double> order(std::size_t i, double ErrorRecord::*column) const;
};

/// One level: mesh, spaces, system, solve, errors.
ErrorRecord run_level(const StudyConfig& config, int m);

/// Runs every level in order. If a level fails, the exception propagates
/// after `partial` (when given) has received the completed records.
ConvergenceReport convergence_study(const StudyConfig& config,
                                    const std::function<void(const ErrorRecord&)>& on_level = {},
                                    ConvergenceReport* partial = nullptr);

std::string report_to_csv(const ConvergenceReport& report);
std::string report_to_json(const ConvergenceReport& report);
ConvergenceReport report_from_json(const std::string& text);

/// format: "csv" or "json".
void export_report(const ConvergenceReport& report, const std::string& format, const std::string& path);

} // namespace ipmix
