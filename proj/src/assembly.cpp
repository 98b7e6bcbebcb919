#include "ipmix/assembly.hpp"

#include <algorithm>
#include <limits>

#include <unsupported/Eigen/SparseExtra>

#include "ipmix/error.hpp"
#include "ipmix/parallel.hpp"

namespace ipmix
{

namespace
{

double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i)
        r *= i;
    return r;
}

struct LocalBlock
{
    std::vector<int> rows;
    std::vector<int> cols;
    Eigen::MatrixXd values;
};

SparseMatrix build_sparse(int rows, int cols, const std::vector<LocalBlock>& blocks)
{
    std::vector<Eigen::Triplet<double>> triplets;
    std::size_t count = 0;
    for (const auto& b : blocks)
        count += b.values.size();
    triplets.reserve(count);
    for (const auto& b : blocks)
        for (std::size_t c = 0; c < b.cols.size(); ++c)
            for (std::size_t r = 0; r < b.rows.size(); ++r)
                if (b.values(r, c) != 0.0)
                    triplets.emplace_back(b.rows[r], b.cols[c], b.values(r, c));
    SparseMatrix m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

void check_space(const SimplicialMesh& mesh, const StressSpace& space)
{
    if (space.dim() != mesh.dim() || space.num_elements() != mesh.num_elements())
        throw ConfigError("stress space does not match the mesh");
}

} // namespace

void Material::validate() const
{
    if (!(mu > 0.0))
        throw ConfigError("material: mu must be positive");
    if (!(2.0 * mu + dim * lambda > 0.0))
        throw ConfigError("material: 2 mu + n lambda must be positive");
}

SmallMatrix compliance_apply(const Material& material, const SmallMatrix& sigma)
{
    const int n       = static_cast<int>(sigma.rows());
    const double beta = material.lambda / (2.0 * material.mu + n * material.lambda);
    return (sigma - beta * sigma.trace() * SmallMatrix::Identity(n, n)) / (2.0 * material.mu);
}

ElementTabulation tabulate_stress(const SimplexGeometry& geom, const ElementStressDofs& dofs, int degree)
{
    return tabulate_stress(geom, dofs, quadrature_rule(geom.dim, degree));
}

ElementTabulation tabulate_stress(const SimplexGeometry& geom, const ElementStressDofs& dofs,
                                  const QuadratureRule& rule)
{
    const int nf               = static_cast<int>(dofs.fields.size());
    const double scale         = factorial(geom.dim) * geom.measure;

    std::vector<std::vector<BarycentricPoly>> divs;
    divs.reserve(nf);
    for (const auto& f : dofs.fields)
        divs.push_back(f.divergence_poly(geom));

    ElementTabulation tab;
    tab.nfields = nf;
    tab.values.resize(rule.size() * nf);
    tab.divergences.resize(rule.size() * nf);
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
        const Barycentric& lam = rule.points[q];
        tab.weights.push_back(rule.weights[q] * scale);
        tab.points.push_back(geom.to_cartesian(lam));
        for (int c = 0; c < nf; ++c)
        {
            tab.values[q * nf + c] = dofs.signs[c] * dofs.fields[c].value(geom, lam);
            Point d(geom.dim);
            for (int m = 0; m < geom.dim; ++m)
                d(m) = divs[c][m].evaluate(lam);
            tab.divergences[q * nf + c] = dofs.signs[c] * d;
        }
    }
    return tab;
}

std::vector<SmallMatrix> face_trace_values(const SimplicialMesh& mesh, const StressSpace& space, int f, int side,
                                           const QuadratureRule& rule)
{
    const Face& face = mesh.faces()[f];
    const int e      = face.elements[side];
    if (e < 0)
        throw ConfigError("face_trace_values: face has no element on that side");
    const int i                   = face.local_index[side];
    const SimplexGeometry geom    = simplex_geometry(mesh, e);
    const FaceOrdering ord        = face_ordering(mesh, e)[i];
    const ElementStressDofs& dofs = space.element(e);
    const int nf                  = static_cast<int>(dofs.fields.size());

    std::vector<SmallMatrix> out(rule.size() * nf);
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
        Barycentric lam{};
        for (int r = 0; r < mesh.dim(); ++r)
            lam[ord.canonical_to_local[r]] = rule.points[q][r];
        for (int c = 0; c < nf; ++c)
            out[q * nf + c] = dofs.signs[c] * dofs.fields[c].value(geom, lam);
    }
    return out;
}

SparseMatrix assemble_compliance(const SimplicialMesh& mesh, const StressSpace& space, const Material& material)
{
    check_space(mesh, space);
    material.validate();
    const int ne = mesh.num_elements();
    std::vector<LocalBlock> blocks(ne);
    parallel_for(ne, [&](int e) {
        const SimplexGeometry geom   = simplex_geometry(mesh, e);
        const ElementStressDofs& eds = space.element(e);
        const ElementTabulation tab  = tabulate_stress(geom, eds, QuadratureDegrees::mass(space.k()));
        const int nf                 = tab.nfields;
        LocalBlock& b                = blocks[e];
        b.rows = b.cols = eds.dofs;
        b.values        = Eigen::MatrixXd::Zero(nf, nf);
        std::vector<SmallMatrix> a(nf);
        for (std::size_t q = 0; q < tab.weights.size(); ++q)
        {
            for (int c = 0; c < nf; ++c)
                a[c] = compliance_apply(material, tab.values[q * nf + c]);
            for (int c = 0; c < nf; ++c)
                for (int r = 0; r <= c; ++r)
                    b.values(r, c) += tab.weights[q] * a[c].cwiseProduct(tab.values[q * nf + r]).sum();
        }
        b.values.triangularView<Eigen::StrictlyLower>() = b.values.transpose();
    });
    return build_sparse(space.num_dofs(), space.num_dofs(), blocks);
}

PenaltyLength parse_penalty_length(const std::string& name)
{
    if (name == "face")
        return PenaltyLength::FaceDiameter;
    if (name == "min-edge")
        return PenaltyLength::MinEdge;
    if (name == "max-diameter")
        return PenaltyLength::MaxElementDiameter;
    throw ConfigError("unknown penalty length '" + name + "' (expected face, min-edge or max-diameter)");
}

std::string to_string(PenaltyLength length)
{
    switch (length)
    {
    case PenaltyLength::FaceDiameter:
        return "face";
    case PenaltyLength::MinEdge:
        return "min-edge";
    case PenaltyLength::MaxElementDiameter:
        return "max-diameter";
    }
    return "face";
}

std::vector<double> penalty_lengths(const SimplicialMesh& mesh, PenaltyLength length)
{
    const int nf = mesh.faces().size();
    std::vector<double> h(nf);
    if (length == PenaltyLength::FaceDiameter)
    {
        for (int f = 0; f < nf; ++f)
            h[f] = mesh.faces()[f].diameter;
        return h;
    }
    double value = length == PenaltyLength::MinEdge ? std::numeric_limits<double>::infinity() : 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e)
    {
        const SimplexGeometry geom = simplex_geometry(mesh, e);
        if (length == PenaltyLength::MinEdge)
            for (int p = 0; p < num_pairs(geom.dim); ++p)
                value = std::min(value, geom.edge_lengths[p]);
        else
            value = std::max(value, geom.diameter);
    }
    std::fill(h.begin(), h.end(), value);
    return h;
}

SparseMatrix assemble_penalty(const SimplicialMesh& mesh, const StressSpace& space, PenaltyLength length)
{
    check_space(mesh, space);
    const std::vector<double> hf = penalty_lengths(mesh, length);
    const int dim              = mesh.dim();
    const QuadratureRule& rule = quadrature_rule(dim - 1, QuadratureDegrees::face(space.k()));
    const double ref           = factorial(dim - 1);

    std::vector<int> interior;
    for (int f = 0; f < mesh.faces().size(); ++f)
        if (mesh.faces()[f].is_interior())
            interior.push_back(f);

    std::vector<LocalBlock> blocks(interior.size());
    parallel_for(static_cast<int>(interior.size()), [&](int idx) {
        const int f      = interior[idx];
        const Face& face = mesh.faces()[f];
        const auto plus  = face_trace_values(mesh, space, f, 0, rule);
        const auto minus = face_trace_values(mesh, space, f, 1, rule);
        const auto& dp   = space.element(face.elements[0]);
        const auto& dm   = space.element(face.elements[1]);
        const int np     = static_cast<int>(dp.dofs.size());
        const int nm     = static_cast<int>(dm.dofs.size());
        const int n      = np + nm;

        LocalBlock& b = blocks[idx];
        b.rows        = dp.dofs;
        b.rows.insert(b.rows.end(), dm.dofs.begin(), dm.dofs.end());
        b.cols   = b.rows;
        b.values = Eigen::MatrixXd::Zero(n, n);

        Eigen::MatrixXd jumps(dim, n);
        for (std::size_t q = 0; q < rule.size(); ++q)
        {
            for (int c = 0; c < np; ++c)
                jumps.col(c) = plus[q * np + c] * face.normal;
            for (int c = 0; c < nm; ++c)
                jumps.col(np + c) = -(minus[q * nm + c] * face.normal);
            const double w = rule.weights[q] * ref * face.measure / hf[f];
            b.values.noalias() += w * jumps.transpose() * jumps;
        }
    });
    return build_sparse(space.num_dofs(), space.num_dofs(), blocks);
}

SparseMatrix assemble_stress_mass(const SimplicialMesh& mesh, const StressSpace& space)
{
    // With lambda = 0 and 2 mu = 1 the compliance is the identity.
    return assemble_compliance(mesh, space, Material{0.5, 0.0, mesh.dim()});
}

SparseMatrix assemble_div_gram(const SimplicialMesh& mesh, const StressSpace& space)
{
    check_space(mesh, space);
    const int ne = mesh.num_elements();
    std::vector<LocalBlock> blocks(ne);
    parallel_for(ne, [&](int e) {
        const SimplexGeometry geom   = simplex_geometry(mesh, e);
        const ElementStressDofs& eds = space.element(e);
        const ElementTabulation tab  = tabulate_stress(geom, eds, QuadratureDegrees::mass(space.k()));
        const int nf                 = tab.nfields;
        LocalBlock& b                = blocks[e];
        b.rows = b.cols = eds.dofs;
        Eigen::MatrixXd d(geom.dim, nf);
        b.values = Eigen::MatrixXd::Zero(nf, nf);
        for (std::size_t q = 0; q < tab.weights.size(); ++q)
        {
            for (int c = 0; c < nf; ++c)
                d.col(c) = tab.divergences[q * nf + c];
            b.values.noalias() += tab.weights[q] * d.transpose() * d;
        }
    });
    return build_sparse(space.num_dofs(), space.num_dofs(), blocks);
}

SparseMatrix assemble_a(const SimplicialMesh& mesh, const StressSpace& space, const Material& material, double eta,
                        PenaltyLength length)
{
    if (!(eta >= 0.0))
        throw ConfigError("assemble_a: eta must be nonnegative");
    SparseMatrix a = assemble_compliance(mesh, space, material);
    if (eta > 0.0)
        a += eta * assemble_penalty(mesh, space, length);
    return a;
}

SparseMatrix assemble_b(const SimplicialMesh& mesh, const StressSpace& stress, const DisplacementSpace& disp)
{
    check_space(mesh, stress);
    if (disp.dim() != mesh.dim() || disp.num_dofs() != disp.block_size() * mesh.num_elements())
        throw ConfigError("displacement space does not match the mesh");
    const int dim = mesh.dim();
    const int ne  = mesh.num_elements();
    const int ns  = disp.scalar_size();
    std::vector<LocalBlock> blocks(ne);
    parallel_for(ne, [&](int e) {
        const SimplexGeometry geom   = simplex_geometry(mesh, e);
        const ElementStressDofs& eds = stress.element(e);
        const ElementTabulation tab  = tabulate_stress(geom, eds, QuadratureDegrees::mass(stress.k()));
        const QuadratureRule& rule   = quadrature_rule(dim, QuadratureDegrees::mass(stress.k()));
        const int nf                 = tab.nfields;

        LocalBlock& b = blocks[e];
        b.cols        = eds.dofs;
        for (int m = 0; m < dim; ++m)
            for (int a = 0; a < ns; ++a)
                b.rows.push_back(disp.dof(e, m, a));
        b.values = Eigen::MatrixXd::Zero(disp.block_size(), nf);
        for (std::size_t q = 0; q < rule.size(); ++q)
            for (int a = 0; a < ns; ++a)
            {
                const double v = tab.weights[q] * disp.monomials()[a].evaluate(rule.points[q]);
                for (int c = 0; c < nf; ++c)
                    for (int m = 0; m < dim; ++m)
                        b.values(m * ns + a, c) += v * tab.divergences[q * nf + c](m);
            }
    });
    return build_sparse(disp.num_dofs(), stress.num_dofs(), blocks);
}

Eigen::VectorXd assemble_rhs(const SimplicialMesh& mesh, const DisplacementSpace& disp, const VectorField& f,
                             int degree)
{
    const int dim = mesh.dim();
    const int ne  = mesh.num_elements();
    const int ns  = disp.scalar_size();
    if (degree < 0)
        degree = QuadratureDegrees::load(disp.k());
    const QuadratureRule& rule = quadrature_rule(dim, degree);
    Eigen::VectorXd rhs        = Eigen::VectorXd::Zero(disp.num_dofs());
    parallel_for(ne, [&](int e) {
        const SimplexGeometry geom = simplex_geometry(mesh, e);
        const double scale         = factorial(dim) * geom.measure;
        for (std::size_t q = 0; q < rule.size(); ++q)
        {
            const Point fx = f(geom.to_cartesian(rule.points[q]));
            const double w = rule.weights[q] * scale;
            for (int a = 0; a < ns; ++a)
            {
                const double v = w * disp.monomials()[a].evaluate(rule.points[q]);
                for (int m = 0; m < dim; ++m)
                    rhs(disp.dof(e, m, a)) += v * fx(m);
            }
        }
    });
    return rhs;
}

SparseMatrix assemble_displacement_mass(const SimplicialMesh& mesh, const DisplacementSpace& disp)
{
    const int dim = mesh.dim();
    const int ne  = mesh.num_elements();
    const int ns  = disp.scalar_size();
    Eigen::MatrixXd ref(ns, ns);
    for (int a = 0; a < ns; ++a)
        for (int b = 0; b < ns; ++b)
            ref(a, b) = mean_product(disp.monomials()[a], disp.monomials()[b]);

    std::vector<LocalBlock> blocks(ne);
    for (int e = 0; e < ne; ++e)
    {
        const double vol = simplex_geometry(mesh, e).measure;
        LocalBlock& b    = blocks[e];
        for (int m = 0; m < dim; ++m)
            for (int a = 0; a < ns; ++a)
                b.rows.push_back(disp.dof(e, m, a));
        b.cols   = b.rows;
        b.values = Eigen::MatrixXd::Zero(disp.block_size(), disp.block_size());
        for (int m = 0; m < dim; ++m)
            b.values.block(m * ns, m * ns, ns, ns) = vol * ref;
    }
    return build_sparse(disp.num_dofs(), disp.num_dofs(), blocks);
}

SparseMatrix SaddlePointSystem::full_matrix() const
{
    const int ns = num_stress();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(A.nonZeros() + 2 * B.nonZeros());
    for (int c = 0; c < A.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(A, c); it; ++it)
            t.emplace_back(it.row(), it.col(), it.value());
    for (int c = 0; c < B.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(B, c); it; ++it)
        {
            t.emplace_back(ns + it.row(), it.col(), it.value());
            t.emplace_back(it.col(), ns + it.row(), it.value());
        }
    SparseMatrix k(size(), size());
    k.setFromTriplets(t.begin(), t.end());
    return k;
}

Eigen::VectorXd SaddlePointSystem::full_rhs() const
{
    Eigen::VectorXd b = Eigen::VectorXd::Zero(size());
    b.tail(num_displacement()) = rhs;
    return b;
}

Discretization build_discretization(const SimplicialMesh& mesh, int k, SpaceKind kind)
{
    return {build_stress_space(mesh, k, kind), build_displacement_space(mesh, k)};
}

SaddlePointSystem build_saddle_system(const SimplicialMesh& mesh, const Discretization& disc,
                                      const Material& material, double eta, const VectorField& f,
                                      PenaltyLength length)
{
    SaddlePointSystem s;
    s.eta    = eta;
    s.A      = assemble_a(mesh, disc.stress, material, eta, length);
    s.B      = assemble_b(mesh, disc.stress, disc.displacement);
    s.mass_v = assemble_displacement_mass(mesh, disc.displacement);
    s.rhs    = assemble_rhs(mesh, disc.displacement, f);
    return s;
}

void export_matrix_market(const SaddlePointSystem& system, const std::string& prefix)
{
    const bool ok = Eigen::saveMarket(system.A, prefix + "_A.mtx")
                    && Eigen::saveMarket(system.B, prefix + "_B.mtx")
                    && Eigen::saveMarketVector(system.rhs, prefix + "_rhs.mtx");
    if (!ok)
        throw IoError("failed writing matrix market files with prefix " + prefix);
}

} // namespace ipmix
