#include <gtest/gtest.h>
#include <json.hpp>

#include "ipmix/error.hpp"
#include "ipmix/verify.hpp"

using namespace ipmix;

namespace
{

void expect_pass(const CheckResult& r)
{
    EXPECT_TRUE(r.passed) << r.name << ": expected " << r.expected << ", computed " << r.computed << " ["
                          << r.detail << "]";
}

} // namespace

TEST(NumericalRank, ThresholdAndStability)
{
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
    m.diagonal() << 1.0, 1e-3, 1e-14;
    const auto r = numerical_rank(m);
    EXPECT_EQ(r.rank, 2);
    EXPECT_TRUE(r.stable);
    m(2, 2) = 1e-9;
    EXPECT_FALSE(numerical_rank(m).stable);
    EXPECT_EQ(numerical_rank(Eigen::MatrixXd::Zero(2, 2)).rank, 0);
}

TEST(RandomSimplex, DeterministicAndNondegenerate)
{
    const auto a = random_simplex(3, 7), b = random_simplex(3, 7), c = random_simplex(3, 8);
    ASSERT_EQ(a.size(), 4u);
    for (int i = 0; i < 4; ++i)
        EXPECT_EQ(a[i], b[i]);
    EXPECT_NE(a[1], c[1]);
    EXPECT_GT(simplex_geometry(std::span<const Point>(a)).measure, 0.01);
}

TEST(Verify, Unisolvency)
{
    for (int n : {2, 3})
        for (int k : {0, 1, 2})
            expect_pass(check_unisolvency(n, k, 3));
    EXPECT_NE(check_unisolvency(2, 0, 1).expected.find("9x9"), std::string::npos);
    EXPECT_NE(check_unisolvency(3, 1, 1).expected.find("60x60"), std::string::npos);
    EXPECT_NE(check_unisolvency(2, 2, 1).expected.find("30x30"), std::string::npos);
}

TEST(Verify, LocalFamilies)
{
    for (int n : {2, 3})
        for (int k : {0, 1, 2})
        {
            expect_pass(check_local_decomposition(n, k, 2));
            expect_pass(check_face_duality(n, k, 2));
            expect_pass(check_nc_moments(n, k, 2));
            expect_pass(check_polynomial_decomposition(n, k));
        }
}

TEST(Verify, DivBubbleRange)
{
    for (int n : {2, 3})
        for (int k : {0, 1, 2})
            expect_pass(check_div_bubble_range(n, k));
}

TEST(Verify, TraceDimensionTables)
{
    const int rigid2[] = {2, 3, 3}, p01_2[] = {2, 4, 4}, face2[] = {2, 4, 6}, h1_2[] = {0, 2, 4};
    for (int k = 0; k <= 2; ++k)
    {
        const auto t = trace_dimensions(2, k);
        EXPECT_EQ(t.rigid, rigid2[k]);
        EXPECT_EQ(t.p01, p01_2[k]);
        EXPECT_EQ(t.face_bubbles, face2[k]);
        EXPECT_EQ(t.h1_bubbles, h1_2[k]);
    }
    const int face3[] = {3, 9, 18, 30}, h1_3[] = {0, 0, 3, 9};
    for (int k = 0; k <= 3; ++k)
    {
        const auto t = trace_dimensions(3, k);
        EXPECT_EQ(t.face_bubbles, face3[k]);
        EXPECT_EQ(t.h1_bubbles, h1_3[k]);
        EXPECT_EQ(t.rigid, k == 0 ? 3 : 6);
    }
    for (int n : {2, 3})
        for (int k = 0; k <= (n == 3 ? 3 : 2); ++k)
            expect_pass(check_trace_dimensions(n, k));
}

TEST(Verify, ConformingTraceBound)
{
    for (auto [n, k] : {std::pair{2, 1}, std::pair{3, 1}, std::pair{3, 2}})
    {
        const auto t = conforming_patch_trace(n, k, generic_patch(n));
        EXPECT_LE(t.normal_component, 1);
        EXPECT_LT(t.p1_moment_rank, n * n);
        expect_pass(check_conforming_trace_bound(n, k));
    }
    expect_pass(check_conforming_trace_bound(2, 2));
}

TEST(Verify, PatchOnHyperplaneRejected)
{
    // The two opposite vertices and a shared vertex are collinear.
    std::vector<Point> v(4, Point::Zero(2));
    v[0] << 0, 0;
    v[1] << 0, 1;
    v[2] << -1, 0;
    v[3] << 1, 0;
    EXPECT_THROW(conforming_patch_trace(2, 1, v), ConfigError);
}

TEST(Verify, SpaceDimensions)
{
    expect_pass(check_space_dimensions(generate_uniform_mesh(2, 8), 0));
    expect_pass(check_space_dimensions(generate_uniform_mesh(3, 2), 0));
    expect_pass(check_space_dimensions(generate_uniform_mesh(2, 3), 2));
}

TEST(Verify, S2Structure)
{
    expect_pass(check_direct_sum(2));
    expect_pass(check_direct_sum(3));
    expect_pass(check_s2_independence(2, 3));
    expect_pass(check_s2_independence(3, 1));
}

TEST(Verify, InfSupBounded)
{
    const double b2 = inf_sup_constant(generate_uniform_mesh(2, 2), 0, SpaceKind::S1, 1.0);
    const double b4 = inf_sup_constant(generate_uniform_mesh(2, 4), 0, SpaceKind::S1, 1.0);
    EXPECT_GT(b2, 0.0);
    EXPECT_LT(std::max(b2, b4) / std::min(b2, b4), 2.0);
    expect_pass(check_inf_sup(2, 0, SpaceKind::S2, {2, 4}));
}

TEST(Verify, ScalingLaws)
{
    const auto r = face_bubble_scaling(2, 4);
    EXPECT_NEAR(r.l2 / r.expected_l2, 1.0, 0.05);
    EXPECT_NEAR(r.div / r.expected_div, 1.0, 0.05);
    EXPECT_NEAR(r.trace / r.expected_trace, 1.0, 0.05);
    EXPECT_NEAR(r.expected_l2, 1.0, 1e-14); // h^{1 - n/2} with n = 2
    expect_pass(check_scaling(3));
}

TEST(Verify, FullSuiteAndReports)
{
    const auto report = run_all_checks();
    EXPECT_GT(report.checks.size(), 40u);
    for (const auto& c : report.checks)
        expect_pass(c);
    EXPECT_TRUE(report.all_passed());
    const auto j = nlohmann::json::parse(report.to_json());
    EXPECT_EQ(j["checks"].size(), report.checks.size());
    EXPECT_NE(report.to_text().find("PASS"), std::string::npos);
}
