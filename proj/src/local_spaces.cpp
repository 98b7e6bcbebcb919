#include "ipmix/local_spaces.hpp"

#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "ipmix/error.hpp"

namespace ipmix
{

namespace
{

double frobenius_rank_one(const SimplexGeometry& geom, int p, int q)
{
    const double d = geom.tangents[p].dot(geom.tangents[q]);
    return d * d;
}

/// Mean over face F_i of an element polynomial.
double face_mean(const BarycentricPoly& p, int i)
{
    return restrict_to_face(p, i).mean();
}

} // namespace

SymTensorField::SymTensorField(int dim) : dim_(dim)
{
    for (auto& c : coeffs_)
        c = BarycentricPoly(dim + 1);
}

SymTensorField SymTensorField::rank_one(int dim, int i, int j, const BarycentricPoly& c)
{
    SymTensorField f(dim);
    f.coeffs_[pair_index(i, j, dim)] = c;
    return f;
}

SymTensorField SymTensorField::from_matrix(const SimplexGeometry& geom, const SmallMatrix& E,
                                           const BarycentricPoly& c)
{
    const int np = num_pairs(geom.dim);
    Eigen::MatrixXd gram(np, np);
    Eigen::VectorXd rhs(np);
    for (int p = 0; p < np; ++p)
    {
        const Point& t = geom.tangents[p];
        rhs(p)         = t.dot(E * t);
        for (int q = 0; q < np; ++q)
            gram(p, q) = frobenius_rank_one(geom, p, q);
    }
    const Eigen::VectorXd x = gram.partialPivLu().solve(rhs);
    SymTensorField f(geom.dim);
    for (int p = 0; p < np; ++p)
        f.coeffs_[p] = x(p) * c;
    return f;
}

int SymTensorField::degree() const
{
    int d = -1;
    for (int p = 0; p < num_pairs(dim_); ++p)
        d = std::max(d, coeffs_[p].degree());
    return d;
}

SmallMatrix SymTensorField::value(const SimplexGeometry& geom, const Barycentric& lambda) const
{
    SmallMatrix v = SmallMatrix::Zero(dim_, dim_);
    for (int p = 0; p < num_pairs(dim_); ++p)
    {
        if (coeffs_[p].is_zero())
            continue;
        const Point& t = geom.tangents[p];
        v += coeffs_[p].evaluate(lambda) * (t * t.transpose());
    }
    return v;
}

Point SymTensorField::divergence(const SimplexGeometry& geom, const Barycentric& lambda) const
{
    Point d = Point::Zero(dim_);
    for (int p = 0; p < num_pairs(dim_); ++p)
    {
        if (coeffs_[p].is_zero())
            continue;
        const Point& t = geom.tangents[p];
        double dir     = 0.0;
        for (int l = 0; l <= dim_; ++l)
            dir += coeffs_[p].derivative(l).evaluate(lambda) * t.dot(geom.grad_lambda[l]);
        d += dir * t;
    }
    return d;
}

std::vector<BarycentricPoly> SymTensorField::divergence_poly(const SimplexGeometry& geom) const
{
    std::vector<BarycentricPoly> out(dim_, BarycentricPoly(dim_ + 1));
    for (int p = 0; p < num_pairs(dim_); ++p)
    {
        if (coeffs_[p].is_zero())
            continue;
        const Point& t = geom.tangents[p];
        BarycentricPoly dir(dim_ + 1);
        for (int l = 0; l <= dim_; ++l)
            dir += t.dot(geom.grad_lambda[l]) * coeffs_[p].derivative(l);
        for (int m = 0; m < dim_; ++m)
            out[m] += t(m) * dir;
    }
    return out;
}

Eigen::VectorXd SymTensorField::coordinates(int degree) const
{
    const int nvars  = dim_ + 1;
    const auto monos = homogeneous_exponents(nvars, degree);
    std::map<MultiIndex, int> index;
    for (std::size_t r = 0; r < monos.size(); ++r)
        index[monos[r]] = static_cast<int>(r);

    const int dp = static_cast<int>(monos.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(num_pairs(dim_) * dp);
    for (int p = 0; p < num_pairs(dim_); ++p)
    {
        if (coeffs_[p].is_zero())
            continue;
        const BarycentricPoly h = coeffs_[p].homogenized(degree);
        for (const auto& [m, c] : h.terms())
            x(p * dp + index.at(m)) = c;
    }
    return x;
}

SymTensorField& SymTensorField::operator+=(const SymTensorField& o)
{
    if (dim_ == 0)
        *this = SymTensorField(o.dim_);
    for (int p = 0; p < num_pairs(dim_); ++p)
        coeffs_[p] += o.coeffs_[p];
    return *this;
}

SymTensorField& SymTensorField::operator*=(double s)
{
    for (auto& c : coeffs_)
        c *= s;
    return *this;
}

std::vector<SmallMatrix> rank_one_tensor_basis(const SimplexGeometry& geom)
{
    std::vector<SmallMatrix> out;
    for (int p = 0; p < num_pairs(geom.dim); ++p)
        out.push_back(geom.tangents[p] * geom.tangents[p].transpose());
    return out;
}

ElementFaceOrdering default_face_ordering(int dim)
{
    ElementFaceOrdering ord;
    for (int i = 0; i <= dim; ++i)
        for (int l = 0, r = 0; l <= dim; ++l)
            if (l != i)
                ord[i].canonical_to_local[r++] = l;
    return ord;
}

ElementFaceOrdering face_ordering(const SimplicialMesh& mesh, int element)
{
    const int dim  = mesh.dim();
    const auto ids = mesh.element(element);
    ElementFaceOrdering ord;
    for (int i = 0; i <= dim; ++i)
    {
        const Face& f = mesh.faces()[mesh.element_face(element, i)];
        for (int r = 0; r < dim; ++r)
            for (int l = 0; l <= dim; ++l)
                if (ids[l] == f.vertices[r])
                    ord[i].canonical_to_local[r] = l;
    }
    return ord;
}

BarycentricPoly lift_face_poly(const BarycentricPoly& p, int dim, const FaceOrdering& ordering)
{
    return remap_variables(p, dim + 1, std::span<const int>(ordering.canonical_to_local.data(), dim));
}

std::vector<SymTensorField> conforming_div_bubbles(const SimplexGeometry& geom, int k)
{
    const int dim = geom.dim;
    std::vector<SymTensorField> out;
    const auto q = span_basis(SpaceSpec::full(k - 1), dim);
    for (int p = 0; p < num_pairs(dim); ++p)
    {
        const auto [i, j]            = pair_vertices(p, dim);
        const BarycentricPoly bubble = BarycentricPoly::variable(dim + 1, i) * BarycentricPoly::variable(dim + 1, j);
        for (const BarycentricPoly& qq : q)
            out.push_back(SymTensorField::rank_one(dim, i, j, bubble * qq));
    }
    return out;
}

std::vector<SymTensorField> nonconforming_div_bubbles(const SimplexGeometry& geom, int k)
{
    const int dim   = geom.dim;
    const auto perp = perp_complement_basis(dim - 1, k);
    std::vector<SymTensorField> out;
    for (int p = 0; p < num_pairs(dim); ++p)
    {
        const auto [i, j] = pair_vertices(p, dim);
        for (const BarycentricPoly& q : perp)
            out.push_back(SymTensorField::rank_one(dim, i, j, extend_from_face(q, j, i)));
    }
    return out;
}

std::vector<BarycentricPoly> face_dual_polynomials(int dim, int i, int j, int k, const FaceOrdering& ordering)
{
    const auto phi = orthonormal_face_basis(dim - 1, k);
    const auto psi = span_basis(SpaceSpec::hat0i(k, i), dim);
    const int nb   = static_cast<int>(psi.size());
    const BarycentricPoly lj = BarycentricPoly::variable(dim + 1, j);

    Eigen::MatrixXd gram(nb, nb);
    for (int t = 0; t < nb; ++t)
    {
        const BarycentricPoly lifted = lift_face_poly(phi[t], dim, ordering);
        for (int r = 0; r < nb; ++r)
            gram(t, r) = face_mean(lj * psi[r] * lifted, i);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
    const auto& sv = svd.singularValues();
    if (!(sv(nb - 1) > 1e-12 * sv(0)))
        throw PrecisionError("face_dual_polynomials: singular weighted Gram system");

    const Eigen::MatrixXd inv = gram.inverse();
    std::vector<BarycentricPoly> out;
    for (int s = 0; s < nb; ++s)
    {
        BarycentricPoly d(dim + 1);
        for (int r = 0; r < nb; ++r)
            d += inv(r, s) * psi[r];
        out.push_back(d);
    }
    return out;
}

std::vector<SymTensorField> face_bubble_dual_basis(const SimplexGeometry& geom, int i, int k,
                                                   const FaceOrdering& ordering)
{
    const int dim    = geom.dim;
    const int nphi   = static_cast<int>(poly_dim(dim - 1, k));
    const Point& nu  = geom.normals[i];
    const double fm  = geom.face_measures[i];
    std::vector<SymTensorField> out(nphi * dim, SymTensorField(dim));

    for (int j = 0; j <= dim; ++j)
    {
        if (j == i)
            continue;
        const auto dual          = face_dual_polynomials(dim, i, j, k, ordering);
        const Point t            = geom.tangent(i, j);
        const double scale       = geom.edge_length(i, j) / (t.dot(nu) * fm);
        const BarycentricPoly lj = BarycentricPoly::variable(dim + 1, j);
        const int p              = pair_index(i, j, dim);
        for (int s = 0; s < nphi; ++s)
        {
            const BarycentricPoly base = lj * dual[s];
            for (int l = 0; l < dim; ++l)
            {
                const double alpha = geom.grad_lambda[j](l) * scale;
                if (alpha != 0.0)
                    out[s * dim + l].coefficient(p) += alpha * base;
            }
        }
    }
    return out;
}

std::vector<double> face_moments(const SimplexGeometry& geom, const SymTensorField& tau, int i, int k,
                                 const FaceOrdering& ordering)
{
    const int dim  = geom.dim;
    const auto phi = orthonormal_face_basis(dim - 1, k);
    const int nphi = static_cast<int>(phi.size());
    const Point& nu = geom.normals[i];
    std::vector<double> out(nphi * dim, 0.0);
    for (int t = 0; t < nphi; ++t)
    {
        const BarycentricPoly lifted = lift_face_poly(phi[t], dim, ordering);
        for (int p = 0; p < num_pairs(dim); ++p)
        {
            const BarycentricPoly& c = tau.coefficient(p);
            if (c.is_zero())
                continue;
            const Point& tp      = geom.tangents[p];
            const double integral = geom.face_measures[i] * face_mean(c * lifted, i) * tp.dot(nu);
            for (int m = 0; m < dim; ++m)
                out[t * dim + m] += integral * tp(m);
        }
    }
    return out;
}

std::vector<SymTensorField> LocalStressBasis::all() const
{
    std::vector<SymTensorField> out;
    for (int i = 0; i <= dim; ++i)
        out.insert(out.end(), face_bubbles[i].begin(), face_bubbles[i].end());
    out.insert(out.end(), conforming_bubbles.begin(), conforming_bubbles.end());
    out.insert(out.end(), nc_bubbles.begin(), nc_bubbles.end());
    return out;
}

int LocalStressBasis::size() const
{
    std::size_t n = conforming_bubbles.size() + nc_bubbles.size();
    for (int i = 0; i <= dim; ++i)
        n += face_bubbles[i].size();
    return static_cast<int>(n);
}

Eigen::MatrixXd coordinate_matrix(const std::vector<SymTensorField>& fields, int degree)
{
    if (fields.empty())
        return {};
    const Eigen::Index rows = fields.front().coordinates(degree).size();
    Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c)
        m.col(c) = fields[c].coordinates(degree);
    return m;
}

LocalStressBasis local_decomposition(const SimplexGeometry& geom, int k, const ElementFaceOrdering& ordering,
                                     bool validate)
{
    if (k < 0 || k > 2)
        throw ConfigError("local_decomposition: order k must be 0, 1 or 2");
    LocalStressBasis b;
    b.dim                = geom.dim;
    b.k                  = k;
    b.conforming_bubbles = conforming_div_bubbles(geom, k);
    b.nc_bubbles         = nonconforming_div_bubbles(geom, k);
    for (int i = 0; i <= geom.dim; ++i)
        b.face_bubbles[i] = face_bubble_dual_basis(geom, i, k, ordering[i]);

    const long long expected = num_pairs(geom.dim) * binomial(geom.dim + k + 1, k + 1);
    if (b.size() != expected)
        throw StructuralError("local_decomposition: wrong number of basis fields");
    if (validate)
    {
        const Eigen::MatrixXd c = coordinate_matrix(b.all(), k + 1);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(c);
        const auto& sv = svd.singularValues();
        if (!(sv(sv.size() - 1) > 1e-10 * sv(0)))
            throw StructuralError("local_decomposition: basis is rank deficient");
    }
    return b;
}

LocalStressBasis local_decomposition(const SimplexGeometry& geom, int k)
{
    return local_decomposition(geom, k, default_face_ordering(geom.dim));
}

Eigen::MatrixXd local_dof_matrix(const SimplexGeometry& geom, int k, const ElementFaceOrdering& ordering,
                                 const std::vector<SymTensorField>& fields)
{
    const int dim = geom.dim;
    std::vector<SymTensorField> interior = conforming_div_bubbles(geom, k);
    const auto nc                        = nonconforming_div_bubbles(geom, k);
    interior.insert(interior.end(), nc.begin(), nc.end());

    const int nface = (dim + 1) * dim * static_cast<int>(poly_dim(dim - 1, k));
    const int rows  = nface + static_cast<int>(interior.size());
    Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(fields.size()));

    for (std::size_t c = 0; c < fields.size(); ++c)
    {
        int r = 0;
        for (int i = 0; i <= dim; ++i)
            for (double v : face_moments(geom, fields[c], i, k, ordering[i]))
                m(r++, c) = v;
        for (const SymTensorField& theta : interior)
        {
            double v = 0.0;
            for (int p = 0; p < num_pairs(dim); ++p)
            {
                if (fields[c].coefficient(p).is_zero())
                    continue;
                for (int q = 0; q < num_pairs(dim); ++q)
                    if (!theta.coefficient(q).is_zero())
                        v += frobenius_rank_one(geom, p, q)
                             * mean_product(fields[c].coefficient(p), theta.coefficient(q));
            }
            m(r++, c) = v * geom.measure;
        }
    }
    return m;
}

} // namespace ipmix
