#include "ipmix/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <json.hpp>

#include "ipmix/assembly.hpp"
#include "ipmix/error.hpp"
#include "ipmix/local_spaces.hpp"
#include "ipmix/parallel.hpp"

namespace ipmix
{

namespace
{

Eigen::VectorXd poly_coords(const BarycentricPoly& p, int nvars, int degree)
{
    const auto monos = homogeneous_exponents(nvars, degree);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(monos.size()));
    if (p.is_zero())
        return x;
    const BarycentricPoly h = p.homogenized(degree);
    for (std::size_t r = 0; r < monos.size(); ++r)
        x(r) = h.coefficient(monos[r]);
    return x;
}

Eigen::VectorXd stack(const std::vector<Eigen::VectorXd>& parts)
{
    Eigen::Index n = 0;
    for (const auto& p : parts)
        n += p.size();
    Eigen::VectorXd x(n);
    Eigen::Index off = 0;
    for (const auto& p : parts)
    {
        x.segment(off, p.size()) = p;
        off += p.size();
    }
    return x;
}

Eigen::MatrixXd columns(const std::vector<Eigen::VectorXd>& cols)
{
    if (cols.empty())
        return {};
    Eigen::MatrixXd m(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        m.col(c) = cols[c];
    return m;
}

/// Restriction to F_i written in the canonical face order.
BarycentricPoly restrict_canonical(const BarycentricPoly& p, int i, const FaceOrdering& ord)
{
    const int dim             = p.nvars() - 1;
    const BarycentricPoly loc = restrict_to_face(p, i);
    std::array<int, 3> map{};
    for (int r = 0; r < dim; ++r)
    {
        const int l = r < i ? r : r + 1;
        for (int c = 0; c < dim; ++c)
            if (ord.canonical_to_local[c] == l)
                map[r] = c;
    }
    return remap_variables(loc, dim, std::span<const int>(map.data(), dim));
}

BarycentricPoly cartesian_entry(const SymTensorField& f, const SimplexGeometry& geom, int a, int b)
{
    BarycentricPoly out(geom.dim + 1);
    for (int p = 0; p < num_pairs(geom.dim); ++p)
        if (!f.coefficient(p).is_zero())
            out += (geom.tangents[p](a) * geom.tangents[p](b)) * f.coefficient(p);
    return out;
}

/// Components of tau nu as element polynomials.
std::vector<BarycentricPoly> normal_trace(const SymTensorField& f, const SimplexGeometry& geom, const Point& nu)
{
    std::vector<BarycentricPoly> out(geom.dim, BarycentricPoly(geom.dim + 1));
    for (int a = 0; a < geom.dim; ++a)
        for (int b = 0; b < geom.dim; ++b)
            out[a] += nu(b) * cartesian_entry(f, geom, a, b);
    return out;
}

/// Coordinates of a vector polynomial restricted to face i (canonical order).
Eigen::VectorXd face_vector_coords(const std::vector<BarycentricPoly>& v, int i, const FaceOrdering& ord,
                                   int degree)
{
    std::vector<Eigen::VectorXd> parts;
    const int dim = static_cast<int>(v.size());
    for (const auto& comp : v)
        parts.push_back(poly_coords(restrict_canonical(comp, i, ord), dim, degree));
    return stack(parts);
}

std::vector<SymTensorField> cartesian_basis(const SimplexGeometry& geom, int degree)
{
    const int dim = geom.dim;
    std::vector<SymTensorField> out;
    for (int a = 0; a < dim; ++a)
        for (int b = a; b < dim; ++b)
        {
            SmallMatrix E = SmallMatrix::Zero(dim, dim);
            E(a, b) = E(b, a) = 1.0;
            for (const auto& mono : span_basis(SpaceSpec::full(degree), dim))
                out.push_back(SymTensorField::from_matrix(geom, E, mono));
        }
    return out;
}

Eigen::MatrixXd kernel(const Eigen::MatrixXd& a)
{
    if (a.rows() == 0)
        return Eigen::MatrixXd::Identity(a.cols(), a.cols());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol = rank_tolerance * (sv.size() ? sv(0) : 0.0);
    int r = 0;
    while (r < sv.size() && sv(r) > tol)
        ++r;
    return svd.matrixV().rightCols(a.cols() - r);
}

std::vector<SimplexGeometry> test_simplices(int n, int trials)
{
    std::vector<SimplexGeometry> out;
    const SimplicialMesh ref = reference_simplex_mesh(n);
    out.push_back(simplex_geometry(ref, 0));
    for (int t = 0; t < trials; ++t)
    {
        const auto v = random_simplex(n, 1000 + 17 * t + n);
        out.push_back(simplex_geometry(std::span<const Point>(v)));
    }
    return out;
}

std::string fmt(double v)
{
    std::ostringstream ss;
    ss.precision(3);
    ss << std::scientific << v;
    return ss.str();
}

std::string label(const std::string& base, int n, int k)
{
    return base + " (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")";
}

bool hyperplane_assumption(int n, const std::vector<Point>& v)
{
    const Point& a  = v[n];
    const Point& ap = v[n + 1];
    for (int mask = 1; mask < (1 << n); ++mask)
    {
        std::vector<int> subset;
        for (int r = 0; r < n; ++r)
            if (mask & (1 << r))
                subset.push_back(r);
        const int s = static_cast<int>(subset.size());
        if (s > n - 1)
            continue;
        // [a, subset] and [a', subset] span one s-dimensional affine plane
        // iff a' lies in the affine hull of a and the subset.
        Eigen::MatrixXd m(n, s + 1);
        for (int c = 0; c < s; ++c)
            m.col(c) = v[subset[c]] - a;
        m.col(s) = ap - a;
        if (numerical_rank(m).rank <= s)
            return false;
    }
    return true;
}

} // namespace

RankInfo numerical_rank(const Eigen::MatrixXd& m, double tol)
{
    RankInfo info;
    if (m.size() == 0)
        return info;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv(0) == 0.0)
        return info;
    auto count = [&](double t) {
        int r = 0;
        while (r < sv.size() && sv(r) > t * sv(0))
            ++r;
        return r;
    };
    info.rank            = count(tol);
    info.stable          = count(1e-7) == info.rank && count(1e-11) == info.rank;
    info.smallest_kept   = info.rank > 0 ? sv(info.rank - 1) / sv(0) : 0.0;
    info.largest_dropped = info.rank < sv.size() ? sv(info.rank) / sv(0) : 0.0;
    return info;
}

bool VerificationReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string VerificationReport::to_text() const
{
    std::ostringstream out;
    for (const auto& c : checks)
    {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << ": computed " << c.computed << ", expected "
            << c.expected;
        if (!c.detail.empty())
            out << " [" << c.detail << "]";
        out << '\n';
    }
    const auto failed = std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; });
    out << checks.size() - failed << "/" << checks.size() << " checks passed\n";
    return out.str();
}

std::string VerificationReport::to_json() const
{
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : checks)
        j.push_back({{"name", c.name},
                     {"passed", c.passed},
                     {"expected", c.expected},
                     {"computed", c.computed},
                     {"detail", c.detail}});
    return nlohmann::json{{"all_passed", all_passed()}, {"checks", j}}.dump(2);
}

std::vector<Point> random_simplex(int dim, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.25, 0.25);
    for (;;)
    {
        std::vector<Point> v;
        v.push_back(Point::Zero(dim));
        for (int i = 0; i < dim; ++i)
            v.push_back(Point::Unit(dim, i));
        for (auto& p : v)
            for (int c = 0; c < dim; ++c)
                p(c) += jitter(rng);
        Eigen::MatrixXd jac(dim, dim);
        for (int c = 0; c < dim; ++c)
            jac.col(c) = v[c + 1] - v[0];
        // Keep only reasonably shaped simplices.
        if (std::abs(jac.determinant()) > 0.3)
            return v;
    }
}

CheckResult check_unisolvency(int n, int k, int trials)
{
    CheckResult r;
    r.name         = label("unisolvency", n, k);
    const int size = static_cast<int>(num_pairs(n) * poly_dim(n, k + 1));
    double worst   = 1.0;
    bool square    = true;
    for (const auto& geom : test_simplices(n, trials))
    {
        Eigen::MatrixXd m = local_dof_matrix(geom, k, default_face_ordering(n), cartesian_basis(geom, k + 1));
        if (m.rows() != size || m.cols() != size)
        {
            square = false;
            break;
        }
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            m.row(i).normalize();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m.col(j).normalize();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        const auto& sv = svd.singularValues();
        worst          = std::min(worst, sv(sv.size() - 1) / sv(0));
    }
    r.passed   = square && worst > 1e-8;
    r.expected = "square " + std::to_string(size) + "x" + std::to_string(size) + ", scaled sigma_min > 1e-8";
    r.computed = square ? "scaled sigma_min " + fmt(worst) : "non-square dof matrix";
    r.detail   = "reference + " + std::to_string(trials) + " random simplices";
    return r;
}

CheckResult check_local_decomposition(int n, int k, int trials)
{
    CheckResult r;
    r.name              = label("local decomposition", n, k);
    const long long np  = num_pairs(n);
    const long long nb  = np * poly_dim(n, k - 1);
    const long long nnc = np * binomial(k + n - 1, n - 2);
    const long long nf  = n * binomial(n - 1 + k, k);
    const long long tot = np * binomial(n + k + 1, k + 1);
    bool ok             = nb + nnc + (n + 1) * nf == tot;
    int min_rank        = static_cast<int>(tot);
    for (const auto& geom : test_simplices(n, trials))
    {
        const LocalStressBasis b = local_decomposition(geom, k, default_face_ordering(n), false);
        ok = ok && static_cast<long long>(b.conforming_bubbles.size()) == nb
             && static_cast<long long>(b.nc_bubbles.size()) == nnc;
        for (int i = 0; i <= n; ++i)
            ok = ok && static_cast<long long>(b.face_bubbles[i].size()) == nf;
        const RankInfo ri = numerical_rank(coordinate_matrix(b.all(), k + 1));
        ok                = ok && ri.stable;
        min_rank          = std::min(min_rank, ri.rank);
    }
    ok         = ok && min_rank == tot;
    r.passed   = ok;
    r.expected = "rank " + std::to_string(tot) + " (" + std::to_string(nb) + " conforming + "
                 + std::to_string((n + 1) * nf) + " face + " + std::to_string(nnc) + " nc)";
    r.computed = "rank " + std::to_string(min_rank);
    return r;
}

CheckResult check_face_duality(int n, int k, int trials)
{
    CheckResult r;
    r.name       = label("face-bubble duality", n, k);
    double worst = 0.0;
    for (const auto& geom : test_simplices(n, trials))
    {
        const auto ord = default_face_ordering(n);
        for (int i = 0; i <= n; ++i)
        {
            const auto bubbles = face_bubble_dual_basis(geom, i, k, ord[i]);
            for (std::size_t c = 0; c < bubbles.size(); ++c)
                for (int s = 0; s <= n; ++s)
                {
                    const auto mom = face_moments(geom, bubbles[c], s, k, ord[s]);
                    for (std::size_t q = 0; q < mom.size(); ++q)
                    {
                        const double target = (s == i && q == c) ? 1.0 : 0.0;
                        worst               = std::max(worst, std::abs(mom[q] - target));
                    }
                }
        }
    }
    r.passed   = worst <= 1e-12;
    r.expected = "max |N - I| <= 1e-12";
    r.computed = fmt(worst);
    return r;
}

CheckResult check_nc_moments(int n, int k, int trials)
{
    CheckResult r;
    r.name       = label("nc-bubble face moments", n, k);
    double worst = 0.0;
    for (const auto& geom : test_simplices(n, trials))
    {
        const auto ord = default_face_ordering(n);
        for (const auto& f : nonconforming_div_bubbles(geom, k))
            for (int s = 0; s <= n; ++s)
                for (double v : face_moments(geom, f, s, k, ord[s]))
                    worst = std::max(worst, std::abs(v));
    }
    r.passed   = worst <= 1e-12;
    r.expected = "max |N| <= 1e-12";
    r.computed = fmt(worst);
    return r;
}

CheckResult check_polynomial_decomposition(int n, int k)
{
    CheckResult r;
    r.name          = label("P_{k+1} decomposition", n, k);
    const int nvars = n + 1;
    const int total = static_cast<int>(poly_dim(n, k + 1));
    bool ok         = true;
    int worst_rank  = total;
    bool symmetric  = true;

    const auto face_pk = span_basis(SpaceSpec::full(k), n - 1);
    const auto perp    = perp_complement_basis(n - 1, k);
    for (int i = 0; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
        {
            const BarycentricPoly li = BarycentricPoly::variable(nvars, i);
            const BarycentricPoly lj = BarycentricPoly::variable(nvars, j);
            std::vector<Eigen::VectorXd> cols;
            for (const auto& q : span_basis(SpaceSpec::full(k - 1), n))
                cols.push_back(poly_coords(li * lj * q, nvars, k + 1));
            for (const auto& q : face_pk)
            {
                cols.push_back(poly_coords(lj * extend_from_face(q, i, std::nullopt), nvars, k + 1));
                cols.push_back(poly_coords(li * extend_from_face(q, j, std::nullopt), nvars, k + 1));
            }
            std::vector<Eigen::VectorXd> ej, ei;
            for (const auto& q : perp)
            {
                ej.push_back(poly_coords(extend_from_face(q, j, i), nvars, k + 1));
                ei.push_back(poly_coords(extend_from_face(q, i, j), nvars, k + 1));
            }
            cols.insert(cols.end(), ej.begin(), ej.end());
            const RankInfo ri = numerical_rank(columns(cols));
            ok                = ok && ri.stable && static_cast<int>(cols.size()) == total && ri.rank == total;
            worst_rank        = std::min(worst_rank, ri.rank);

            const Eigen::MatrixXd a = columns(ej), b = columns(ei);
            Eigen::MatrixXd ab(a.rows(), a.cols() + b.cols());
            ab << a, b;
            const int ra = numerical_rank(a).rank, rb = numerical_rank(b).rank, rab = numerical_rank(ab).rank;
            symmetric    = symmetric && ra == rb && ra == rab && ra == static_cast<int>(perp.size());
        }
    r.passed   = ok && symmetric;
    r.expected = "rank " + std::to_string(total) + " for every pair; E_j^i P_k^perp(F_j) = E_i^j P_k^perp(F_i)";
    r.computed = "min rank " + std::to_string(worst_rank) + (symmetric ? ", symmetric" : ", not symmetric");
    return r;
}

CheckResult check_div_bubble_range(int n, int k)
{
    CheckResult r;
    r.name = label("div-bubble range", n, k);
    const SimplicialMesh ref   = reference_simplex_mesh(n);
    const SimplexGeometry geom = simplex_geometry(ref, 0);
    const auto bubbles         = conforming_div_bubbles(geom, k);
    const auto rigid           = rigid_motion_basis(geom, k);
    const int nvars            = n + 1;
    const int expected         = static_cast<int>(n * poly_dim(n, k)) - static_cast<int>(rigid.size());

    if (k == 0)
    {
        r.passed   = bubbles.empty() && expected == 0;
        r.expected = "empty bubble set, R_0^perp = {0}";
        r.computed = std::to_string(bubbles.size()) + " bubbles";
        return r;
    }

    // Vector P_k coordinates and their L2 Gram matrix.
    const auto monos = span_basis(SpaceSpec::full(k), n);
    const int dp     = static_cast<int>(monos.size());
    Eigen::MatrixXd mass(dp, dp);
    for (int a = 0; a < dp; ++a)
        for (int b = 0; b < dp; ++b)
            mass(a, b) = mean_product(monos[a], monos[b]);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n * dp, n * dp);
    for (int m = 0; m < n; ++m)
        gram.block(m * dp, m * dp, dp, dp) = mass;

    auto vcoords = [&](const std::vector<BarycentricPoly>& v) {
        std::vector<Eigen::VectorXd> parts;
        for (const auto& c : v)
            parts.push_back(poly_coords(c, nvars, k));
        return stack(parts);
    };

    std::vector<Eigen::VectorXd> divs, rig;
    for (const auto& b : bubbles)
        divs.push_back(vcoords(b.divergence_poly(geom)));
    for (const auto& v : rigid)
        rig.push_back(vcoords(v));
    const Eigen::MatrixXd d   = columns(divs);
    const Eigen::MatrixXd rm  = columns(rig);
    const Eigen::MatrixXd perp = kernel(rm.transpose() * gram);

    const double orth = (rm.transpose() * gram * d).cwiseAbs().maxCoeff() / std::max(1.0, d.cwiseAbs().maxCoeff());
    Eigen::MatrixXd both(d.rows(), d.cols() + perp.cols());
    both << d, perp;
    const RankInfo rd = numerical_rank(d), rp = numerical_rank(perp), rb = numerical_rank(both);

    r.passed = rd.stable && rp.stable && rb.stable && rd.rank == expected && rp.rank == expected
               && rb.rank == expected && orth <= 1e-12;
    r.expected = "rank " + std::to_string(expected) + " = span of R_k^perp, orthogonal to R_k (1e-12)";
    r.computed = "rank " + std::to_string(rd.rank) + ", joint rank " + std::to_string(rb.rank)
                 + ", max |(div tau, r)| " + fmt(orth);
    return r;
}

TraceDimensions trace_dimensions(int n, int k)
{
    const SimplicialMesh ref   = reference_simplex_mesh(n);
    const SimplexGeometry geom = simplex_geometry(ref, 0);
    const auto ord             = default_face_ordering(n);
    const int face             = 0;
    const Point& nu            = geom.normals[face];
    TraceDimensions t;

    std::vector<Eigen::VectorXd> cols;
    for (const auto& v : rigid_motion_basis(geom, k))
        cols.push_back(face_vector_coords(v, face, ord[face], 1));
    t.rigid = numerical_rank(columns(cols)).rank;

    cols.clear();
    for (const auto& q : span_basis(SpaceSpec::full(std::min(k, 1)), n - 1))
        for (int m = 0; m < n; ++m)
        {
            std::vector<Eigen::VectorXd> parts(n, Eigen::VectorXd::Zero(poly_dim(n - 1, std::min(k, 1))));
            parts[m] = poly_coords(q, n, std::min(k, 1));
            cols.push_back(stack(parts));
        }
    t.p01 = numerical_rank(columns(cols)).rank;

    cols.clear();
    for (const auto& f : face_bubble_dual_basis(geom, face, k, ord[face]))
        cols.push_back(face_vector_coords(normal_trace(f, geom, nu), face, ord[face], k + 1));
    t.face_bubbles = numerical_rank(columns(cols)).rank;

    // H^1 face bubbles of F_0: P_{k+1}(S) fields vanishing on every other face.
    const auto basis = cartesian_basis(geom, k + 1);
    std::vector<Eigen::VectorXd> constraint_rows;
    std::vector<std::vector<Eigen::VectorXd>> per_field(basis.size());
    for (std::size_t c = 0; c < basis.size(); ++c)
    {
        std::vector<Eigen::VectorXd> parts;
        for (int s = 0; s <= n; ++s)
        {
            if (s == face)
                continue;
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b)
                    parts.push_back(poly_coords(restrict_canonical(cartesian_entry(basis[c], geom, a, b), s, ord[s]),
                                                n, k + 1));
        }
        constraint_rows.push_back(stack(parts));
    }
    const Eigen::MatrixXd cmat = columns(constraint_rows);
    const Eigen::MatrixXd ker  = kernel(cmat);
    cols.clear();
    for (Eigen::Index j = 0; j < ker.cols(); ++j)
    {
        SymTensorField tau(n);
        for (std::size_t c = 0; c < basis.size(); ++c)
            if (ker(c, j) != 0.0)
            {
                SymTensorField part = basis[c];
                part *= ker(c, j);
                tau += part;
            }
        cols.push_back(face_vector_coords(normal_trace(tau, geom, nu), face, ord[face], k + 1));
    }
    t.h1_bubbles = cols.empty() ? 0 : numerical_rank(columns(cols)).rank;
    return t;
}

CheckResult check_trace_dimensions(int n, int k)
{
    // Expected table rows, indexed by k.
    static const std::map<int, std::vector<TraceDimensions>> table = {
        {2, {{2, 2, 2, 0}, {3, 4, 4, 2}, {3, 4, 6, 4}}},
        {3, {{3, 3, 3, 0}, {6, 9, 9, 0}, {6, 9, 18, 3}, {6, 9, 30, 9}}}};
    CheckResult r;
    r.name = label("trace dimensions", n, k);
    const auto& row = table.at(n).at(k);
    const TraceDimensions t = trace_dimensions(n, k);
    auto str = [](const TraceDimensions& d) {
        return "R_k|F " + std::to_string(d.rigid) + ", P_0/P_1 " + std::to_string(d.p01) + ", face bubbles "
               + std::to_string(d.face_bubbles) + ", H1 bubbles " + std::to_string(d.h1_bubbles);
    };
    r.passed   = t.rigid == row.rigid && t.p01 == row.p01 && t.face_bubbles == row.face_bubbles
                 && t.h1_bubbles == row.h1_bubbles;
    r.expected = str(row);
    r.computed = str(t);
    return r;
}

std::vector<Point> generic_patch(int n)
{
    std::vector<Point> v;
    auto pt = [n](std::initializer_list<double> c) {
        Point p(n);
        int i = 0;
        for (double x : c)
            p(i++) = x;
        return p;
    };
    if (n == 2)
    {
        v = {pt({0.0, 0.0}), pt({1.0, 0.1}), pt({0.35, 0.9}), pt({0.62, -0.85})};
    }
    else
    {
        v = {pt({0.0, 0.0, 0.0}), pt({1.0, 0.1, 0.05}), pt({0.2, 0.95, -0.1}), pt({0.3, 0.35, 0.9}),
             pt({0.45, 0.25, -0.8})};
    }
    return v;
}

PatchTrace conforming_patch_trace(int n, int k, const std::vector<Point>& vertices)
{
    if (static_cast<int>(vertices.size()) != n + 2)
        throw ConfigError("conforming_patch_trace: expected n + 2 vertices");
    if (!hyperplane_assumption(n, vertices))
        throw ConfigError("conforming_patch_trace: patch violates the hyperplane assumption");

    std::vector<SimplicialMesh::Element> elements(2, SimplicialMesh::Element{-1, -1, -1, -1});
    elements[0][0] = n;
    elements[1][0] = n + 1;
    for (int r = 0; r < n; ++r)
        elements[0][r + 1] = elements[1][r + 1] = r;
    const SimplicialMesh mesh = SimplicialMesh::from_elements(n, vertices, elements);

    int shared = -1;
    for (int f = 0; f < mesh.faces().size(); ++f)
        if (mesh.faces()[f].is_interior())
            shared = f;
    const Face& face = mesh.faces()[shared];
    const Point& nuF = face.normal;

    std::array<SimplexGeometry, 2> geom{simplex_geometry(mesh, 0), simplex_geometry(mesh, 1)};
    std::array<ElementFaceOrdering, 2> ord{face_ordering(mesh, 0), face_ordering(mesh, 1)};
    std::array<int, 2> local{};
    for (int s = 0; s < 2; ++s)
        local[face.elements[s]] = face.local_index[s];

    std::array<std::vector<SymTensorField>, 2> basis{cartesian_basis(geom[0], k + 1), cartesian_basis(geom[1], k + 1)};
    const int nb = static_cast<int>(basis[0].size());

    // Columns = unknowns (K fields, then K' fields); rows = constraints.
    std::vector<std::vector<Eigen::VectorXd>> rows(2 * nb);
    for (int e = 0; e < 2; ++e)
        for (int c = 0; c < nb; ++c)
        {
            auto& col = rows[e * nb + c];
            std::vector<Eigen::VectorXd> own_faces;
            for (int s = 0; s <= n; ++s)
            {
                if (s == local[e])
                    continue;
                own_faces.push_back(face_vector_coords(normal_trace(basis[e][c], geom[e], geom[e].normals[s]), s,
                                                       ord[e][s], k + 1));
            }
            const Eigen::VectorXd own = stack(own_faces);
            const Eigen::Index len    = own.size();
            Eigen::VectorXd zeros     = Eigen::VectorXd::Zero(len);
            col.push_back(e == 0 ? own : zeros);
            col.push_back(e == 1 ? own : zeros);
            const Eigen::VectorXd tr =
                face_vector_coords(normal_trace(basis[e][c], geom[e], nuF), local[e], ord[e][local[e]], k + 1);
            col.push_back(e == 0 ? tr : Eigen::VectorXd(-tr));
        }
    std::vector<Eigen::VectorXd> cols;
    for (const auto& parts : rows)
        cols.push_back(stack(parts));
    const Eigen::MatrixXd ker = kernel(columns(cols));

    // Traces of kernel members on F, seen from K.
    const auto test = orthonormal_face_basis(n - 1, 1);
    std::vector<Eigen::VectorXd> vec_tr, nrm_tr, moments;
    for (Eigen::Index j = 0; j < ker.cols(); ++j)
    {
        SymTensorField tau(n);
        for (int c = 0; c < nb; ++c)
        {
            SymTensorField part = basis[0][c];
            part *= ker(c, j);
            tau += part;
        }
        const auto tn = normal_trace(tau, geom[0], nuF);
        vec_tr.push_back(face_vector_coords(tn, local[0], ord[0][local[0]], k + 1));
        BarycentricPoly nn(n + 1);
        for (int a = 0; a < n; ++a)
            nn += nuF(a) * tn[a];
        nrm_tr.push_back(poly_coords(restrict_canonical(nn, local[0], ord[0][local[0]]), n, k + 1));
        Eigen::VectorXd mom(test.size() * n);
        for (std::size_t t = 0; t < test.size(); ++t)
        {
            const BarycentricPoly lifted = lift_face_poly(test[t], n, ord[0][local[0]]);
            for (int m = 0; m < n; ++m)
                mom(t * n + m) = restrict_to_face(tn[m] * lifted, local[0]).mean();
        }
        moments.push_back(mom);
    }
    PatchTrace out;
    if (!vec_tr.empty())
    {
        // The normal component can vanish identically; measure it against the
        // size of the full trace, not against itself.
        const Eigen::MatrixXd vt = columns(vec_tr);
        out.vector_trace         = numerical_rank(vt).rank;
        const double scale       = Eigen::BDCSVD<Eigen::MatrixXd>(vt).singularValues()(0);
        const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(columns(nrm_tr)).singularValues();
        out.normal_component     = static_cast<int>((sv.array() > rank_tolerance * scale).count());
        out.p1_moment_rank   = numerical_rank(columns(moments)).rank;
    }
    return out;
}

CheckResult check_conforming_trace_bound(int n, int k)
{
    CheckResult r;
    r.name               = label("conforming face-bubble trace bound", n, k);
    const PatchTrace pt  = conforming_patch_trace(n, k, generic_patch(n));
    const int p1_dim     = n * n;
    const auto detail    = "vector trace dim " + std::to_string(pt.vector_trace) + ", P_1 moment rank "
                        + std::to_string(pt.p1_moment_rank) + " of " + std::to_string(p1_dim);
    if (k >= 1 && k <= n - 1)
    {
        r.passed   = pt.normal_component <= 1 && pt.p1_moment_rank < p1_dim;
        r.expected = "normal-component trace dim <= 1 < " + std::to_string(p1_dim);
        r.computed = "normal-component trace dim " + std::to_string(pt.normal_component);
        r.detail   = detail;
    }
    else
    {
        const int rigid = trace_dimensions(n, k).rigid;
        r.passed        = pt.vector_trace >= rigid;
        r.expected      = "bound not applicable; trace dim >= dim R_k|F = " + std::to_string(rigid);
        r.computed      = "vector trace dim " + std::to_string(pt.vector_trace);
        r.detail        = detail;
    }
    return r;
}

CheckResult check_space_dimensions(const SimplicialMesh& mesh, int k)
{
    CheckResult r;
    const int n = mesh.dim();
    r.name      = "space dimensions (n=" + std::to_string(n) + ", k=" + std::to_string(k)
             + ", T=" + std::to_string(mesh.num_elements()) + ")";
    const long long T = mesh.num_elements(), F = mesh.faces().size(), Fi = mesh.faces().num_interior();
    const long long V = mesh.num_vertices();

    const StressSpace s1       = build_space_s1(mesh, k);
    const long long constructive = n * binomial(n - 1 + k, k) * F
                                   + (num_pairs(n) * poly_dim(n, k - 1) + num_pairs(n) * binomial(k + n - 1, n - 2)) * T;
    bool ok = s1.num_dofs() == constructive && constructive == s1_dimension(n, k, T, Fi) && F + Fi == (n + 1) * T;
    ok      = ok && build_displacement_space(mesh, k).num_dofs() == n * binomial(n + k, k) * T;
    std::string computed = "S1 " + std::to_string(s1.num_dofs());
    std::string expected = "S1 " + std::to_string(s1_dimension(n, k, T, Fi));
    if (k == 0 && is_strongly_regular(mesh))
    {
        const StressSpace s2 = build_space_s2(mesh, 0);
        ok = ok && s2.num_dofs() == s2_dimension(n, V, Fi);
        computed += ", S2 " + std::to_string(s2.num_dofs());
        expected += ", S2 " + std::to_string(s2_dimension(n, V, Fi));
    }
    r.passed   = ok;
    r.computed = computed;
    r.expected = expected + ", F + F_i = (n+1) T";
    return r;
}

CheckResult check_direct_sum(int n)
{
    CheckResult r;
    r.name = "S2 direct sum on a strongly regular patch (n=" + std::to_string(n) + ")";
    const auto v = generic_patch(n);
    std::vector<SimplicialMesh::Element> elements(2, SimplicialMesh::Element{-1, -1, -1, -1});
    elements[0][0] = n;
    elements[1][0] = n + 1;
    for (int i = 0; i < n; ++i)
        elements[0][i + 1] = elements[1][i + 1] = i;
    const SimplicialMesh mesh = SimplicialMesh::from_elements(n, v, elements);
    if (!is_strongly_regular(mesh))
        throw ConfigError("check_direct_sum: patch is not strongly regular");

    const StressSpace s2 = build_space_s2(mesh, 0);
    const int nf         = s2.num_face_dofs();
    const int rows_per   = static_cast<int>(num_pairs(n) * poly_dim(n, 1));
    Eigen::MatrixXd g    = Eigen::MatrixXd::Zero(2 * rows_per, s2.num_dofs());
    for (int e = 0; e < 2; ++e)
    {
        const auto& ed = s2.element(e);
        for (std::size_t c = 0; c < ed.fields.size(); ++c)
            g.block(e * rows_per, ed.dofs[c], rows_per, 1) += ed.signs[c] * ed.fields[c].coordinates(1);
    }
    const int rf  = numerical_rank(g.leftCols(nf)).rank;
    const int rl  = numerical_rank(g.rightCols(g.cols() - nf)).rank;
    const RankInfo all = numerical_rank(g);
    r.passed   = all.stable && all.rank == rf + rl && rf == nf && rl == g.cols() - nf;
    r.expected = "rank " + std::to_string(nf) + " + " + std::to_string(g.cols() - nf);
    r.computed = "rank " + std::to_string(rf) + " + " + std::to_string(rl) + " -> " + std::to_string(all.rank);
    return r;
}

CheckResult check_s2_independence(int n, int m)
{
    CheckResult r;
    r.name = "S2 basis independence (n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")";
    const SimplicialMesh mesh = generate_uniform_mesh(n, m);
    const StressSpace s2      = build_space_s2(mesh, 0);
    const int rows_per        = static_cast<int>(num_pairs(n) * poly_dim(n, 1));
    Eigen::MatrixXd g         = Eigen::MatrixXd::Zero(rows_per * mesh.num_elements(), s2.num_dofs());
    for (int e = 0; e < mesh.num_elements(); ++e)
    {
        const auto& ed = s2.element(e);
        for (std::size_t c = 0; c < ed.fields.size(); ++c)
            g.block(e * rows_per, ed.dofs[c], rows_per, 1) += ed.signs[c] * ed.fields[c].coordinates(1);
    }
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        g.col(j).normalize();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(g);
    const auto& sv   = svd.singularValues();
    const double rel = sv(sv.size() - 1) / sv(0);
    r.passed         = rel > 1e-10;
    r.expected       = "full column rank " + std::to_string(g.cols()) + ", sigma_min / sigma_max > 1e-10";
    r.computed       = fmt(rel);
    return r;
}

double inf_sup_constant(const SimplicialMesh& mesh, int k, SpaceKind kind, double eta)
{
    const Discretization disc = build_discretization(mesh, k, kind);
    SparseMatrix s            = assemble_stress_mass(mesh, disc.stress) + assemble_div_gram(mesh, disc.stress);
    if (eta > 0.0)
        s += eta * assemble_penalty(mesh, disc.stress);
    const SparseMatrix b  = assemble_b(mesh, disc.stress, disc.displacement);
    const SparseMatrix mv = assemble_displacement_mass(mesh, disc.displacement);

    Eigen::SimplicialLDLT<SparseMatrix> chol(s);
    if (chol.info() != Eigen::Success)
        throw SolverError("inf_sup_constant: star-norm Gram matrix is not positive definite", -1.0);
    const Eigen::MatrixXd bt    = Eigen::MatrixXd(b.transpose());
    const Eigen::MatrixXd sinv  = chol.solve(bt);
    const Eigen::MatrixXd schur = Eigen::MatrixXd(b) * sinv;
    const Eigen::MatrixXd sym   = 0.5 * (schur + schur.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::MatrixXd(mv));
    return std::sqrt(std::max(0.0, eig.eigenvalues()(0)));
}

CheckResult check_inf_sup(int n, int k, SpaceKind kind, const std::vector<int>& levels, double eta)
{
    CheckResult r;
    r.name = "inf-sup (" + to_string(kind) + ", n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")";
    std::vector<double> betas;
    for (int m : levels)
        betas.push_back(inf_sup_constant(generate_uniform_mesh(n, m), k, kind, eta));
    const double lo = *std::min_element(betas.begin(), betas.end());
    const double hi = *std::max_element(betas.begin(), betas.end());
    std::string list;
    for (std::size_t i = 0; i < betas.size(); ++i)
        list += (i ? ", " : "") + std::string("m=") + std::to_string(levels[i]) + ": " + fmt(betas[i]);
    r.passed   = lo > 0.0 && hi / lo < 2.0;
    r.expected = "max/min < 2";
    r.computed = "max/min " + fmt(lo > 0.0 ? hi / lo : INFINITY);
    r.detail   = list;
    return r;
}

ScalingRatios face_bubble_scaling(int n, int m)
{
    auto norms = [n](int mm) {
        const SimplicialMesh mesh  = generate_uniform_mesh(n, mm);
        const SimplexGeometry geom = simplex_geometry(mesh, 0);
        const auto ord             = face_ordering(mesh, 0);
        const QuadratureRule& rule = quadrature_rule(n, 4);
        const QuadratureRule& frule = quadrature_rule(n - 1, 4);
        double fn = 1.0;
        for (int d = 2; d <= n; ++d)
            fn *= d;
        const double fn1 = fn / n;
        std::array<double, 3> acc{0.0, 0.0, 0.0};
        for (int i = 0; i <= n; ++i)
            for (const auto& phi : face_bubble_dual_basis(geom, i, 0, ord[i]))
            {
                for (std::size_t q = 0; q < rule.size(); ++q)
                {
                    const double w = rule.weights[q] * fn * geom.measure;
                    acc[0] += w * phi.value(geom, rule.points[q]).squaredNorm();
                    acc[1] += w * phi.divergence(geom, rule.points[q]).squaredNorm();
                }
                for (std::size_t q = 0; q < frule.size(); ++q)
                {
                    Barycentric lam{};
                    for (int r = 0; r < n; ++r)
                        lam[ord[i].canonical_to_local[r]] = frule.points[q][r];
                    const double w = frule.weights[q] * fn1 * geom.face_measures[i];
                    acc[2] += w * (phi.value(geom, lam) * geom.normals[i]).squaredNorm();
                }
            }
        return acc;
    };
    const auto coarse = norms(m);
    const auto fine   = norms(2 * m);
    ScalingRatios s;
    s.l2             = std::sqrt(fine[0] / coarse[0]);
    s.div            = std::sqrt(fine[1] / coarse[1]);
    s.trace          = std::sqrt(fine[2] / coarse[2]);
    s.expected_l2    = std::pow(0.5, 1.0 - n / 2.0);
    s.expected_div   = std::pow(0.5, -n / 2.0);
    s.expected_trace = std::pow(0.5, (1.0 - n) / 2.0);
    return s;
}

CheckResult check_scaling(int n)
{
    CheckResult r;
    r.name               = "face-bubble scaling (n=" + std::to_string(n) + ")";
    const ScalingRatios s = face_bubble_scaling(n, 8);
    auto dev              = [](double a, double b) { return std::abs(a / b - 1.0); };
    const double worst    = std::max({dev(s.l2, s.expected_l2), dev(s.div, s.expected_div),
                                      dev(s.trace, s.expected_trace)});
    r.passed   = worst <= 0.05;
    r.expected = "ratios " + fmt(s.expected_l2) + ", " + fmt(s.expected_div) + ", " + fmt(s.expected_trace)
                 + " within 5%";
    r.computed = "ratios " + fmt(s.l2) + ", " + fmt(s.div) + ", " + fmt(s.trace);
    return r;
}

VerificationReport run_all_checks()
{
    std::vector<std::function<CheckResult()>> jobs;
    for (int n : {2, 3})
        for (int k : {0, 1, 2})
        {
            jobs.push_back([n, k] { return check_unisolvency(n, k); });
            jobs.push_back([n, k] { return check_local_decomposition(n, k); });
            jobs.push_back([n, k] { return check_face_duality(n, k); });
            jobs.push_back([n, k] { return check_nc_moments(n, k); });
            jobs.push_back([n, k] { return check_polynomial_decomposition(n, k); });
            jobs.push_back([n, k] { return check_div_bubble_range(n, k); });
        }
    for (int k : {0, 1, 2})
        jobs.push_back([k] { return check_trace_dimensions(2, k); });
    for (int k : {0, 1, 2, 3})
        jobs.push_back([k] { return check_trace_dimensions(3, k); });
    for (auto [n, k] : {std::pair{2, 1}, {3, 1}, {3, 2}, {2, 2}})
        jobs.push_back([n, k] { return check_conforming_trace_bound(n, k); });
    jobs.push_back([] { return check_space_dimensions(generate_uniform_mesh(2, 8), 0); });
    jobs.push_back([] { return check_space_dimensions(generate_uniform_mesh(2, 4), 1); });
    jobs.push_back([] { return check_space_dimensions(generate_uniform_mesh(3, 2), 0); });
    for (int n : {2, 3})
        jobs.push_back([n] { return check_direct_sum(n); });
    jobs.push_back([] { return check_s2_independence(2, 4); });
    jobs.push_back([] { return check_s2_independence(3, 2); });
    for (int n : {2, 3})
        jobs.push_back([n] { return check_scaling(n); });

    VerificationReport report;
    report.checks.resize(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), [&](int i) {
        try
        {
            report.checks[i] = jobs[i]();
        }
        catch (const std::exception& ex)
        {
            report.checks[i].name     = "check #" + std::to_string(i);
            report.checks[i].passed   = false;
            report.checks[i].computed = std::string("exception: ") + ex.what();
        }
    });
    return report;
}

} // namespace ipmix
