#include <algorithm>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "ipmix/error.hpp"
#include "ipmix/solver.hpp"
#include "ipmix/study.hpp"

using namespace ipmix;

namespace
{

SaddlePointSystem make_system(int dim, int m, int k, SpaceKind kind, const VectorField& f)
{
    const auto mesh = generate_uniform_mesh(dim, m);
    const auto disc = build_discretization(mesh, k, kind);
    return build_saddle_system(mesh, disc, Material{0.5, 1.0, dim}, 1.0, f);
}

double relative_residual(const SaddlePointSystem& s, const Solution& sol)
{
    Eigen::VectorXd z(s.size());
    z << sol.sigma, sol.u;
    const Eigen::VectorXd b = s.full_rhs();
    return (s.full_matrix() * z - b).norm() / b.norm();
}

SparseMatrix permutation(const std::vector<int>& p)
{
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t i = 0; i < p.size(); ++i)
        t.emplace_back(static_cast<int>(i), p[i], 1.0);
    SparseMatrix m(p.size(), p.size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

} // namespace

TEST(Solver, ZeroLoadGivesZeroSolution)
{
    const auto s   = make_system(2, 2, 0, SpaceKind::S1, [](const Point& x) { return Point::Zero(x.size()); });
    const auto sol = solve_saddle(s);
    EXPECT_EQ(sol.sigma.size(), s.num_stress());
    EXPECT_EQ(sol.u.size(), s.num_displacement());
    EXPECT_LT(sol.sigma.norm() + sol.u.norm(), 1e-14);
}

TEST(Solver, ManufacturedResidual)
{
    const auto s   = make_system(2, 2, 0, SpaceKind::S1, manufactured_case(2).f);
    const auto sol = solve_saddle(s);
    EXPECT_EQ(sol.method, "umfpack");
    EXPECT_LE(sol.residual, 1e-10);
    EXPECT_LE(relative_residual(s, sol), 1e-10);
}

TEST(Solver, SingleElementMatchesDenseOracle)
{
    const auto mesh = reference_simplex_mesh(2);
    const auto disc = build_discretization(mesh, 0, SpaceKind::S1);
    const auto mc   = manufactured_case(2);
    const auto s    = build_saddle_system(mesh, disc, mc.material, 1.0, mc.f);
    ASSERT_EQ(s.size(), 11);
    const Eigen::MatrixXd k = Eigen::MatrixXd(s.full_matrix());
    const Eigen::VectorXd z = k.fullPivLu().solve(s.full_rhs());
    const auto sol          = solve_saddle(s);
    EXPECT_LT((sol.sigma - z.head(9)).norm(), 1e-12 * (1.0 + z.norm()));
    EXPECT_LT((sol.u - z.tail(2)).norm(), 1e-12 * (1.0 + z.norm()));
}

TEST(Solver, Linearity)
{
    const VectorField f1 = [](const Point& x) {
        Point p(2);
        p << x(0) * x(1), 1.0;
        return p;
    };
    const VectorField f2 = [](const Point& x) {
        Point p(2);
        p << -2.0, x(0) * x(0);
        return p;
    };
    const auto s1  = make_system(2, 3, 1, SpaceKind::S1, f1);
    const auto s2  = make_system(2, 3, 1, SpaceKind::S1, f2);
    const auto s12 = make_system(2, 3, 1, SpaceKind::S1, [&](const Point& x) { return Point(f1(x) + f2(x)); });
    const auto a = solve_saddle(s1), b = solve_saddle(s2), c = solve_saddle(s12);
    EXPECT_LT((c.sigma - a.sigma - b.sigma).norm(), 1e-9 * c.sigma.norm());
    EXPECT_LT((c.u - a.u - b.u).norm(), 1e-9 * c.u.norm());
}

TEST(Solver, PermutationInvariance)
{
    const auto s = make_system(2, 2, 0, SpaceKind::S2, manufactured_case(2).f);
    std::mt19937 rng(42);
    std::vector<int> ps(s.num_stress()), pv(s.num_displacement());
    std::iota(ps.begin(), ps.end(), 0);
    std::iota(pv.begin(), pv.end(), 0);
    std::shuffle(ps.begin(), ps.end(), rng);
    std::shuffle(pv.begin(), pv.end(), rng);
    const SparseMatrix qs = permutation(ps), qv = permutation(pv);

    SaddlePointSystem t = s;
    t.A                 = qs * s.A * SparseMatrix(qs.transpose());
    t.B                 = qv * s.B * SparseMatrix(qs.transpose());
    t.mass_v            = qv * s.mass_v * SparseMatrix(qv.transpose());
    t.rhs               = qv * s.rhs;
    const auto a = solve_saddle(s), b = solve_saddle(t);
    EXPECT_LT((SparseMatrix(qs.transpose()) * b.sigma - a.sigma).norm(), 1e-9 * (1.0 + a.sigma.norm()));
    EXPECT_LT((SparseMatrix(qv.transpose()) * b.u - a.u).norm(), 1e-9 * (1.0 + a.u.norm()));
}

TEST(Solver, MinresAgreesWithDirect)
{
    const auto s = make_system(2, 4, 0, SpaceKind::S1, manufactured_case(2).f);
    SolverOptions opt;
    opt.method     = SolverMethod::Minres;
    opt.tolerance  = 1e-11;
    const auto it  = solve_saddle(s, opt);
    const auto dir = solve_saddle(s);
    EXPECT_EQ(it.method, "minres");
    EXPECT_LE(it.residual, 1e-11);
    EXPECT_LT((it.sigma - dir.sigma).norm(), 1e-7 * dir.sigma.norm());
    EXPECT_LT((it.u - dir.u).norm(), 1e-7 * dir.u.norm());
}

TEST(Solver, SingularSystemRaises)
{
    SaddlePointSystem s;
    s.A = SparseMatrix(3, 3);
    s.A.setIdentity();
    s.B      = SparseMatrix(2, 3);
    s.mass_v = SparseMatrix(2, 2);
    s.mass_v.setIdentity();
    s.rhs = Eigen::VectorXd::Ones(2);
    EXPECT_THROW(solve_saddle(s), SolverError);
}

TEST(Solver, Deterministic)
{
    const auto s = make_system(3, 1, 0, SpaceKind::S1, manufactured_case(3).f);
    const auto a = solve_saddle(s), b = solve_saddle(s);
    EXPECT_EQ(a.sigma, b.sigma);
    EXPECT_EQ(a.u, b.u);
}
