#include "ipmix/global_spaces.hpp"

#include "ipmix/error.hpp"
#include "ipmix/parallel.hpp"

namespace ipmix
{

SpaceKind parse_space_kind(const std::string& name)
{
    if (name == "s1" || name == "S1")
        return SpaceKind::S1;
    if (name == "s2" || name == "S2")
        return SpaceKind::S2;
    throw ConfigError("unknown stress space '" + name + "' (expected s1 or s2)");
}

std::string to_string(SpaceKind kind)
{
    return kind == SpaceKind::S1 ? "s1" : "s2";
}

StressSpace build_space_s1(const SimplicialMesh& mesh, int k)
{
    if (k < 0 || k > 2)
        throw ConfigError("build_space_s1: order k must be 0, 1 or 2");
    const int dim      = mesh.dim();
    const int per_face = dim * static_cast<int>(poly_dim(dim - 1, k));
    const int ne       = mesh.num_elements();

    StressSpace space;
    space.kind_          = SpaceKind::S1;
    space.k_             = k;
    space.dim_           = dim;
    space.num_face_dofs_ = per_face * mesh.faces().size();
    space.elements_.resize(ne);

    const int per_element = static_cast<int>(num_pairs(dim) * (poly_dim(dim, k - 1) + binomial(k + dim - 1, dim - 2)));
    space.num_dofs_       = space.num_face_dofs_ + per_element * ne;

    parallel_for(ne, [&](int e) {
        const SimplexGeometry geom   = simplex_geometry(mesh, e);
        const LocalStressBasis local = local_decomposition(geom, k, face_ordering(mesh, e));
        ElementStressDofs& out       = space.elements_[e];

        for (int i = 0; i <= dim; ++i)
        {
            const int f       = mesh.element_face(e, i);
            const double sign = mesh.faces()[f].elements[0] == e ? 1.0 : -1.0;
            for (int r = 0; r < per_face; ++r)
            {
                out.dofs.push_back(f * per_face + r);
                out.signs.push_back(sign);
                out.fields.push_back(local.face_bubbles[i][r]);
            }
        }
        int next = space.num_face_dofs_ + e * per_element;
        for (const auto* family : {&local.conforming_bubbles, &local.nc_bubbles})
            for (const SymTensorField& f : *family)
            {
                out.dofs.push_back(next++);
                out.signs.push_back(1.0);
                out.fields.push_back(f);
            }
    });
    return space;
}

StressSpace build_space_s2(const SimplicialMesh& mesh, int k)
{
    if (k != 0)
        throw ConfigError("build_space_s2: only k = 0 is supported");
    if (!is_strongly_regular(mesh))
        throw ConfigError("build_space_s2: mesh is not strongly regular");

    const int dim = mesh.dim();
    const int ne  = mesh.num_elements();
    const int np  = num_pairs(dim);

    std::vector<int> interior_index(mesh.faces().size(), -1);
    int ni = 0;
    for (int f = 0; f < mesh.faces().size(); ++f)
        if (mesh.faces()[f].is_interior())
            interior_index[f] = ni++;

    StressSpace space;
    space.kind_          = SpaceKind::S2;
    space.k_             = 0;
    space.dim_           = dim;
    space.num_face_dofs_ = dim * ni;
    space.num_dofs_      = space.num_face_dofs_ + np * mesh.num_vertices();
    space.elements_.resize(ne);

    std::vector<SmallMatrix> components;
    for (int a = 0; a < dim; ++a)
        for (int b = a; b < dim; ++b)
        {
            SmallMatrix E = SmallMatrix::Zero(dim, dim);
            E(a, b) = E(b, a) = 1.0;
            components.push_back(E);
        }

    parallel_for(ne, [&](int e) {
        const SimplexGeometry geom    = simplex_geometry(mesh, e);
        const ElementFaceOrdering ord = face_ordering(mesh, e);
        ElementStressDofs& out        = space.elements_[e];

        for (int i = 0; i <= dim; ++i)
        {
            const int f = mesh.element_face(e, i);
            if (interior_index[f] < 0)
                continue;
            const double sign = mesh.faces()[f].elements[0] == e ? 1.0 : -1.0;
            const auto bubbles = face_bubble_dual_basis(geom, i, 0, ord[i]);
            for (int m = 0; m < dim; ++m)
            {
                out.dofs.push_back(interior_index[f] * dim + m);
                out.signs.push_back(sign);
                out.fields.push_back(bubbles[m]);
            }
        }
        const auto ids = mesh.element(e);
        for (int l = 0; l <= dim; ++l)
        {
            const BarycentricPoly hat = BarycentricPoly::variable(dim + 1, l);
            for (int c = 0; c < np; ++c)
            {
                out.dofs.push_back(space.num_face_dofs_ + ids[l] * np + c);
                out.signs.push_back(1.0);
                out.fields.push_back(SymTensorField::from_matrix(geom, components[c], hat));
            }
        }
    });
    return space;
}

StressSpace build_stress_space(const SimplicialMesh& mesh, int k, SpaceKind kind)
{
    return kind == SpaceKind::S1 ? build_space_s1(mesh, k) : build_space_s2(mesh, k);
}

long long s1_dimension(int dim, int k, long long num_elements, long long num_interior_faces)
{
    return num_pairs(dim) * binomial(dim + k + 1, k + 1) * num_elements
           - dim * binomial(dim - 1 + k, k) * num_interior_faces;
}

long long s2_dimension(int dim, long long num_vertices, long long num_interior_faces)
{
    return dim * num_interior_faces + num_pairs(dim) * num_vertices;
}

DisplacementSpace::DisplacementSpace(int dim, int k, int num_elements)
  : dim_(dim), k_(k), num_elements_(num_elements), monomials_(span_basis(SpaceSpec::full(k), dim))
{
    block_ = dim * static_cast<int>(monomials_.size());
}

DisplacementSpace build_displacement_space(const SimplicialMesh& mesh, int k)
{
    if (k < 0 || k > 2)
        throw ConfigError("build_displacement_space: order k must be 0, 1 or 2");
    return DisplacementSpace(mesh.dim(), k, mesh.num_elements());
}

std::vector<VectorPoly> rigid_motion_basis(const SimplexGeometry& geom, int k)
{
    const int dim   = geom.dim;
    const int nvars = dim + 1;
    std::vector<VectorPoly> out;
    for (int a = 0; a < dim; ++a)
    {
        VectorPoly v(dim, BarycentricPoly(nvars));
        v[a] = BarycentricPoly::constant(nvars, 1.0);
        out.push_back(v);
    }
    if (k < 1)
        return out;

    std::vector<BarycentricPoly> coord(dim, BarycentricPoly(nvars));
    for (int a = 0; a < dim; ++a)
        for (int l = 0; l <= dim; ++l)
            coord[a] += geom.vertices[l](a) * BarycentricPoly::variable(nvars, l);
    for (int a = 0; a < dim; ++a)
        for (int b = a + 1; b < dim; ++b)
        {
            VectorPoly v(dim, BarycentricPoly(nvars));
            v[a] = coord[b];
            v[b] = -1.0 * coord[a];
            out.push_back(v);
        }
    return out;
}

SmallMatrix symmetric_gradient(const SimplexGeometry& geom, const VectorPoly& v, const Barycentric& lambda)
{
    const int dim  = geom.dim;
    SmallMatrix g  = SmallMatrix::Zero(dim, dim);
    for (int a = 0; a < dim; ++a)
        for (int l = 0; l <= dim; ++l)
            g.row(a) += v[a].derivative(l).evaluate(lambda) * geom.grad_lambda[l].transpose();
    return 0.5 * (g + g.transpose());
}

} // namespace ipmix
