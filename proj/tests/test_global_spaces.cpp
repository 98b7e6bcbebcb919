#include <gtest/gtest.h>

#include "ipmix/error.hpp"
#include "ipmix/global_spaces.hpp"

using namespace ipmix;

namespace
{

Point pt(double x, double y)
{
    Point p(2);
    p << x, y;
    return p;
}

} // namespace

TEST(StressSpaceS1, TableDimensions)
{
    EXPECT_EQ(build_space_s1(generate_uniform_mesh(2, 8), 0).num_dofs(), 800);
    EXPECT_EQ(build_space_s1(generate_uniform_mesh(3, 2), 0).num_dofs(), 936);
    EXPECT_EQ(build_space_s1(generate_uniform_mesh(2, 4), 1).num_dofs(), 416);
}

TEST(StressSpaceS1, ClosedFormMatchesDofmap)
{
    for (int dim : {2, 3})
        for (int k : {0, 1, 2})
            for (int m : {1, 2})
            {
                const auto mesh  = generate_uniform_mesh(dim, m);
                const auto space = build_space_s1(mesh, k);
                EXPECT_EQ(space.num_dofs(),
                          s1_dimension(dim, k, mesh.num_elements(), mesh.faces().num_interior()));
                EXPECT_EQ(space.num_face_dofs(), mesh.faces().size() * dim * poly_dim(dim - 1, k));
            }
    EXPECT_EQ(s1_dimension(2, 0, 128, 176), 9 * 128 - 2 * 176);
    EXPECT_EQ(s1_dimension(3, 0, 48, 72), 24 * 48 - 3 * 72);
}

TEST(StressSpaceS1, SharedFaceDofsHaveOppositeSigns)
{
    const auto mesh  = generate_uniform_mesh(2, 2);
    const auto space = build_space_s1(mesh, 0);
    std::vector<std::vector<double>> signs(space.num_dofs());
    for (int e = 0; e < mesh.num_elements(); ++e)
    {
        const auto& el = space.element(e);
        ASSERT_EQ(el.dofs.size(), el.fields.size());
        for (std::size_t c = 0; c < el.dofs.size(); ++c)
            signs[el.dofs[c]].push_back(el.signs[c]);
    }
    for (int d = 0; d < space.num_face_dofs(); ++d)
    {
        ASSERT_FALSE(signs[d].empty());
        if (signs[d].size() == 2)
            EXPECT_DOUBLE_EQ(signs[d][0] * signs[d][1], -1.0);
    }
    for (int d = space.num_face_dofs(); d < space.num_dofs(); ++d)
        EXPECT_EQ(signs[d].size(), 1u);
}

TEST(StressSpaceS2, TableDimensions)
{
    EXPECT_EQ(build_space_s2(generate_uniform_mesh(2, 8)).num_dofs(), 595);
    EXPECT_EQ(build_space_s2(generate_uniform_mesh(2, 16)).num_dofs(), 2339);
    EXPECT_EQ(build_space_s2(generate_uniform_mesh(3, 2)).num_dofs(), 378);
    EXPECT_EQ(s2_dimension(2, 81, 176), 2 * 176 + 3 * 81);
    const auto mesh = generate_uniform_mesh(3, 2);
    EXPECT_EQ(build_space_s2(mesh).num_dofs(), s2_dimension(3, mesh.num_vertices(), mesh.faces().num_interior()));
}

TEST(StressSpaceS2, Rejections)
{
    EXPECT_THROW(build_space_s2(generate_uniform_mesh(2, 2), 1), ConfigError);
    const std::vector<Point> v{pt(0, 0), pt(0, 1), pt(-1, 0), pt(1, 0)};
    const auto mesh = SimplicialMesh::from_elements(2, v, {{2, 0, 1, -1}, {3, 0, 1, -1}});
    EXPECT_THROW(build_space_s2(mesh), ConfigError);
    EXPECT_THROW(parse_space_kind("s3"), ConfigError);
    EXPECT_EQ(parse_space_kind("s2"), SpaceKind::S2);
    EXPECT_EQ(to_string(SpaceKind::S1), "s1");
}

TEST(DisplacementSpace, Dimensions)
{
    EXPECT_EQ(build_displacement_space(generate_uniform_mesh(2, 8), 0).num_dofs(), 256);
    EXPECT_EQ(build_displacement_space(generate_uniform_mesh(3, 2), 0).num_dofs(), 144);
    const auto v = build_displacement_space(generate_uniform_mesh(2, 4), 1);
    EXPECT_EQ(v.num_dofs(), 192);
    EXPECT_EQ(v.block_size(), 6);
    EXPECT_EQ(v.dof(3, 1, 2), 3 * 6 + 3 + 2);
}

TEST(RigidMotions, DimensionsAndZeroStrain)
{
    const auto mesh = generate_uniform_mesh(3, 1);
    const auto g3   = simplex_geometry(mesh, 2);
    const auto g2   = simplex_geometry(generate_uniform_mesh(2, 1), 1);
    EXPECT_EQ(rigid_motion_basis(g2, 0).size(), 2u);
    EXPECT_EQ(rigid_motion_basis(g2, 1).size(), 3u);
    EXPECT_EQ(rigid_motion_basis(g3, 0).size(), 3u);
    EXPECT_EQ(rigid_motion_basis(g3, 1).size(), 6u);
    EXPECT_EQ(rigid_motion_basis(g3, 2).size(), 6u);
    for (const auto* g : {&g2, &g3})
        for (const auto& r : rigid_motion_basis(*g, 2))
            for (const Barycentric lam : {Barycentric{0.25, 0.25, 0.25, 0.25}, Barycentric{0.7, 0.1, 0.1, 0.1}})
                EXPECT_LT(symmetric_gradient(*g, r, lam).norm(), 1e-13);
}
