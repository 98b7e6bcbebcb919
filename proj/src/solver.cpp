#include "ipmix/solver.hpp"

#include <memory>

#include <Eigen/SparseCholesky>
#include <unsupported/Eigen/IterativeSolvers>

extern "C"
{
#include <umfpack.h>
}

#include "ipmix/error.hpp"

namespace ipmix
{

namespace
{

double relative_residual(const SparseMatrix& k, const Eigen::VectorXd& z, const Eigen::VectorXd& b)
{
    return (k * z - b).norm() / b.norm();
}

enum class DirectStatus
{
    Ok,
    OutOfMemory
};

DirectStatus umfpack_solve(SparseMatrix& k, const Eigen::VectorXd& b, Eigen::VectorXd& x)
{
    k.makeCompressed();
    const int n      = static_cast<int>(k.rows());
    const int* ap    = k.outerIndexPtr();
    const int* ai    = k.innerIndexPtr();
    const double* ax = k.valuePtr();

    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_di_defaults(control);

    void* symbolic = nullptr;
    int status     = umfpack_di_symbolic(n, n, ap, ai, ax, &symbolic, control, info);
    if (status == UMFPACK_ERROR_out_of_memory)
        return DirectStatus::OutOfMemory;
    if (status != UMFPACK_OK)
        throw SolverError("sparse factorization: symbolic analysis failed (status " + std::to_string(status) + ")",
                          -1.0);

    void* numeric = nullptr;
    status        = umfpack_di_numeric(ap, ai, ax, symbolic, &numeric, control, info);
    umfpack_di_free_symbolic(&symbolic);
    if (status == UMFPACK_ERROR_out_of_memory)
        return DirectStatus::OutOfMemory;
    if (status == UMFPACK_WARNING_singular_matrix || (status == UMFPACK_OK && info[UMFPACK_RCOND] < 1e-14))
    {
        umfpack_di_free_numeric(&numeric);
        throw SolverError("sparse factorization: matrix is singular", -1.0);
    }
    if (status != UMFPACK_OK)
    {
        umfpack_di_free_numeric(&numeric);
        throw SolverError("sparse factorization failed (status " + std::to_string(status) + ")", -1.0);
    }

    x.resize(n);
    status = umfpack_di_solve(UMFPACK_A, ap, ai, ax, x.data(), b.data(), numeric, control, info);
    umfpack_di_free_numeric(&numeric);
    if (status == UMFPACK_ERROR_out_of_memory)
        return DirectStatus::OutOfMemory;
    if (status != UMFPACK_OK)
        throw SolverError("sparse triangular solve failed (status " + std::to_string(status) + ")", -1.0);
    return DirectStatus::Ok;
}

/// diag(A + B^T M^{-1} B, M) with M the displacement mass matrix.
class BlockPreconditioner
{
  public:
    using StorageIndex = int;
    enum
    {
        ColsAtCompileTime    = Eigen::Dynamic,
        MaxColsAtCompileTime = Eigen::Dynamic
    };

    BlockPreconditioner() = default;

    template <typename MatrixType>
    BlockPreconditioner& analyzePattern(const MatrixType&)
    {
        return *this;
    }
    template <typename MatrixType>
    BlockPreconditioner& factorize(const MatrixType&)
    {
        return *this;
    }
    template <typename MatrixType>
    BlockPreconditioner& compute(const MatrixType&)
    {
        return *this;
    }

    void setup(const SaddlePointSystem& s)
    {
        ns_ = s.num_stress();
        mass_.compute(s.mass_v);
        const SparseMatrix minv_b = mass_.solve(SparseMatrix(s.B));
        const SparseMatrix top    = s.A + SparseMatrix(s.B.transpose()) * minv_b;
        stress_.compute(top);
        ok_ = stress_.info() == Eigen::Success && mass_.info() == Eigen::Success;
    }

    template <typename Rhs>
    Eigen::VectorXd solve(const Eigen::MatrixBase<Rhs>& b) const
    {
        Eigen::VectorXd x(b.size());
        x.head(ns_) = stress_.solve(b.head(ns_));
        x.tail(b.size() - ns_) = mass_.solve(b.tail(b.size() - ns_));
        return x;
    }

    Eigen::ComputationInfo info() const { return ok_ ? Eigen::Success : Eigen::NumericalIssue; }

  private:
    int ns_  = 0;
    bool ok_ = true;
    Eigen::SimplicialLDLT<SparseMatrix> stress_;
    Eigen::SimplicialLDLT<SparseMatrix> mass_;
};

Eigen::VectorXd minres_solve(const SaddlePointSystem& system, const SparseMatrix& k, const Eigen::VectorXd& b,
                             const SolverOptions& options)
{
    Eigen::MINRES<SparseMatrix, Eigen::Lower | Eigen::Upper, BlockPreconditioner> minres;
    minres.setTolerance(options.tolerance * 0.1);
    minres.setMaxIterations(options.max_iterations);
    minres.compute(k);
    minres.preconditioner().setup(system);
    if (minres.preconditioner().info() != Eigen::Success)
        throw SolverError("MINRES: preconditioner factorization failed", -1.0);
    Eigen::VectorXd x = minres.solve(b);
    return x;
}

} // namespace

Solution solve_saddle(const SaddlePointSystem& system, const SolverOptions& options)
{
    const int ns      = system.num_stress();
    SparseMatrix k    = system.full_matrix();
    Eigen::VectorXd b = system.full_rhs();

    Solution sol;
    if (b.norm() == 0.0)
    {
        sol.sigma  = Eigen::VectorXd::Zero(ns);
        sol.u      = Eigen::VectorXd::Zero(system.num_displacement());
        sol.method = "trivial";
        return sol;
    }

    Eigen::VectorXd x;
    bool direct_done = false;
    if (options.method != SolverMethod::Minres)
    {
        const DirectStatus st = umfpack_solve(k, b, x);
        if (st == DirectStatus::Ok)
        {
            direct_done = true;
            sol.method  = "umfpack";
        }
        else if (options.method == SolverMethod::Direct)
        {
            throw SolverError("sparse factorization: out of memory", -1.0);
        }
    }
    if (!direct_done)
    {
        x          = minres_solve(system, k, b, options);
        sol.method = "minres";
    }

    sol.residual = relative_residual(k, x, b);
    if (!(sol.residual <= options.tolerance))
        throw SolverError(sol.method + ": residual above tolerance", sol.residual);
    sol.sigma = x.head(ns);
    sol.u     = x.tail(system.num_displacement());
    return sol;
}

} // namespace ipmix
