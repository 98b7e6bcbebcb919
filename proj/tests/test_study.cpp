#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ipmix/error.hpp"
#include "ipmix/study.hpp"

using namespace ipmix;

namespace
{

Point random_point(int dim, std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(0.05, 0.95);
    Point p(dim);
    for (int c = 0; c < dim; ++c)
        p(c) = u(rng);
    return p;
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string l; std::getline(ss, l);)
        out.push_back(l);
    return out;
}

} // namespace

TEST(Manufactured, PointValues)
{
    Point c2(2);
    c2 << 0.5, 0.5;
    const Point u2 = manufactured_case(2).u(c2);
    EXPECT_NEAR(u2(0), 0.0625, 1e-15);
    EXPECT_NEAR(u2(1), 1.0, 1e-15);
    Point c3(3);
    c3 << 0.5, 0.5, 0.5;
    const Point u3 = manufactured_case(3).u(c3);
    EXPECT_NEAR(u3(0), 0.25, 1e-15);
    EXPECT_NEAR(u3(1), 0.5, 1e-15);
    EXPECT_NEAR(u3(2), 1.0, 1e-15);
}

TEST(Manufactured, ConstitutiveAndEquilibrium)
{
    std::mt19937 rng(2);
    for (int dim : {2, 3})
    {
        const auto mc = manufactured_case(dim);
        EXPECT_EQ(mc.material.dim, dim);
        for (int s = 0; s < 100; ++s)
        {
            const Point x             = random_point(dim, rng);
            const SmallMatrix g       = mc.grad_u(x);
            const SmallMatrix eps     = 0.5 * (g + g.transpose());
            const SmallMatrix a_sigma = compliance_apply(mc.material, mc.sigma(x));
            EXPECT_LT((a_sigma - eps).norm(), 1e-12 * (1.0 + eps.norm()));

            // central differences of u and of sigma
            const double h = 1e-5;
            Point div      = Point::Zero(dim);
            for (int b = 0; b < dim; ++b)
            {
                Point xp = x, xm = x;
                xp(b) += h;
                xm(b) -= h;
                const Point du = (mc.u(xp) - mc.u(xm)) / (2 * h);
                for (int a = 0; a < dim; ++a)
                    EXPECT_NEAR(du(a), g(a, b), 1e-6 * (1.0 + std::abs(g(a, b))));
                div += (mc.sigma(xp) - mc.sigma(xm)).col(b) / (2 * h);
            }
            const Point f = mc.f(x);
            EXPECT_LT((div - f).norm(), 1e-6 * (1.0 + f.norm()));
        }
    }
}

TEST(Manufactured, VanishesOnBoundary)
{
    for (int dim : {2, 3})
    {
        const auto mc = manufactured_case(dim);
        Point x       = Point::Constant(dim, 0.37);
        x(dim - 1)    = 1.0;
        EXPECT_LT(mc.u(x).norm(), 1e-14);
        x(0) = 0.0;
        EXPECT_LT(mc.u(x).norm(), 1e-14);
    }
}

TEST(Errors, ZeroDiscreteStressHasNoJump)
{
    const auto mesh = generate_uniform_mesh(2, 4);
    const auto disc = build_discretization(mesh, 0, SpaceKind::S1);
    const auto mc   = manufactured_case(2);
    Solution zero;
    zero.sigma = Eigen::VectorXd::Zero(disc.stress.num_dofs());
    zero.u     = Eigen::VectorXd::Zero(disc.displacement.num_dofs());
    const auto r = evaluate_errors(mesh, disc, zero, mc, 1.0);
    EXPECT_EQ(r.err_jump, 0.0);
    EXPECT_EQ(r.penalty, 0.0);
    EXPECT_GT(r.err_sigma, 0.1);
    EXPECT_NEAR(r.err_star, std::hypot(r.err_sigma, r.err_div), 1e-14);
}

TEST(Errors, StarNormRecombines)
{
    StudyConfig cfg;
    cfg.dim = 2;
    cfg.eta = 3.0;
    const auto r = run_level(cfg, 4);
    EXPECT_NEAR(r.err_star * r.err_star, r.err_sigma * r.err_sigma + r.err_div * r.err_div + 3.0 * r.penalty,
                1e-12 * r.err_star * r.err_star);
    EXPECT_GT(r.penalty, 0.0);
}

TEST(Errors, JumpNormWeighting)
{
    StudyConfig cfg;
    cfg.dim       = 2;
    cfg.eta       = 4.0;
    const auto a  = run_level(cfg, 4);
    cfg.jump_norm = JumpNorm::EtaWeighted;
    const auto b  = run_level(cfg, 4);
    EXPECT_NEAR(b.err_jump, 2.0 * a.err_jump, 1e-14);
    EXPECT_EQ(a.err_sigma, b.err_sigma);
}

TEST(Study, TablePresetEightByEightRow)
{
    const auto cfg = table_config(2, 0, SpaceKind::S1, {8});
    EXPECT_EQ(cfg.penalty_length, PenaltyLength::MinEdge);
    EXPECT_EQ(cfg.error_quadrature, ErrorQuadrature::Degree2);
    const auto r = run_level(cfg, 8);
    EXPECT_NEAR(r.err_u, 0.06731, 0.02 * 0.06731);
    EXPECT_NEAR(r.err_sigma, 0.17195, 0.02 * 0.17195);
    EXPECT_NEAR(r.err_div, 1.93423, 0.02 * 1.93423);
    EXPECT_NEAR(r.err_jump, 0.03804, 0.02 * 0.03804);
    EXPECT_EQ(r.dim_sigma, 800);
    EXPECT_EQ(r.dim_v, 256);
}

TEST(Study, DefaultsFollowTheFaceDiameter)
{
    StudyConfig cfg;
    EXPECT_EQ(cfg.penalty_length, PenaltyLength::FaceDiameter);
    EXPECT_EQ(cfg.error_quadrature, ErrorQuadrature::Accurate);
    EXPECT_EQ(default_eta(3, SpaceKind::S2), 0.1);
    EXPECT_EQ(default_eta(2, SpaceKind::S2), 1.0);
    EXPECT_EQ(table_config(2, 1, SpaceKind::S1, {}).penalty_length, PenaltyLength::MaxElementDiameter);
}

TEST(Study, FirstOrderDisplacementConvergence)
{
    StudyConfig cfg = table_config(2, 0, SpaceKind::S1, {8, 16, 32});
    const auto rep  = convergence_study(cfg);
    ASSERT_EQ(rep.records.size(), 3u);
    EXPECT_FALSE(rep.order(0, &ErrorRecord::err_u).has_value());
    for (std::size_t i = 1; i < 3; ++i)
    {
        EXPECT_NEAR(*rep.order(i, &ErrorRecord::err_u), 1.0, 0.05);
        EXPECT_NEAR(*rep.order(i, &ErrorRecord::err_div), 1.0, 0.05);
        EXPECT_GT(*rep.order(i, &ErrorRecord::err_jump), 1.4);
    }
}

TEST(Study, SecondOrderForLinearDisplacements)
{
    const auto rep = convergence_study(table_config(2, 1, SpaceKind::S1, {4, 8, 16}));
    EXPECT_NEAR(*rep.order(1, &ErrorRecord::err_u), 1.98, 0.1);
    EXPECT_NEAR(*rep.order(2, &ErrorRecord::err_u), 1.99, 0.1);
}

TEST(Study, CallbackAndPartialReport)
{
    StudyConfig cfg;
    cfg.dim    = 2;
    cfg.levels = {1, 2};
    int calls  = 0;
    const auto rep = convergence_study(cfg, [&](const ErrorRecord& r) { EXPECT_EQ(r.m, cfg.levels[calls++]); });
    EXPECT_EQ(calls, 2);
    EXPECT_EQ(rep.config, cfg);

    cfg.levels = {2, 1};
    EXPECT_THROW(convergence_study(cfg), ConfigError);

    cfg.levels = {1, 2};
    cfg.k      = 5;
    ConvergenceReport partial;
    EXPECT_THROW(convergence_study(cfg, {}, &partial), ConfigError);
    EXPECT_TRUE(partial.records.empty());
    EXPECT_EQ(partial.config, cfg);
}

TEST(Report, CsvLayout)
{
    ConvergenceReport empty;
    const auto header = lines(report_to_csv(empty));
    ASSERT_EQ(header.size(), 1u);
    EXPECT_EQ(header[0], "m,err_u,ord_u,err_sigma,ord_sigma,err_div,ord_div,err_jump,ord_jump,dim_V,dim_Sigma");

    StudyConfig cfg;
    cfg.levels     = {1, 2, 3, 4};
    const auto rep = convergence_study(cfg);
    const auto l   = lines(report_to_csv(rep));
    ASSERT_EQ(l.size(), 5u);
    const std::string& first = l[1];
    EXPECT_EQ(first.substr(0, 2), "1,");
    // blank order cells in the first data row
    int blanks = 0;
    for (std::size_t i = 1; i < first.size(); ++i)
        blanks += first[i] == ',' && first[i - 1] == ',';
    EXPECT_EQ(blanks, 4);
    EXPECT_EQ(l[2].find(",,"), std::string::npos);
}

TEST(Report, JsonRoundTrip)
{
    StudyConfig cfg    = table_config(2, 0, SpaceKind::S2, {2, 4});
    const auto rep     = convergence_study(cfg);
    const auto back    = report_from_json(report_to_json(rep));
    EXPECT_EQ(back.config, rep.config);
    EXPECT_EQ(back.records, rep.records);
    EXPECT_THROW(report_from_json("{\"config\": 1}"), IoError);
}

TEST(Report, ExportDeterministic)
{
    StudyConfig cfg;
    cfg.dim         = 3;
    cfg.levels      = {1, 2};
    const auto dir  = std::filesystem::temp_directory_path();
    const auto a    = (dir / "ipmix_report_a.csv").string();
    const auto b    = (dir / "ipmix_report_b.csv").string();
    export_report(convergence_study(cfg), "csv", a);
    export_report(convergence_study(cfg), "csv", b);
    auto read = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    EXPECT_FALSE(read(a).empty());
    EXPECT_EQ(read(a), read(b));
    std::filesystem::remove(a);
    std::filesystem::remove(b);
    EXPECT_THROW(export_report(ConvergenceReport{}, "xml", a), ConfigError);
    EXPECT_THROW(export_report(ConvergenceReport{}, "csv", "/nonexistent/dir/r.csv"), IoError);
}
