#include "ipmix/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "ipmix/error.hpp"

namespace ipmix
{

namespace
{

Eigen::MatrixXd edge_matrix(std::span<const Point> vertices)
{
    const int dim = static_cast<int>(vertices.size()) - 1;
    Eigen::MatrixXd jac(dim, dim);
    for (int c = 0; c < dim; ++c)
        jac.col(c) = vertices[c + 1] - vertices[0];
    return jac;
}

double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i)
        r *= i;
    return r;
}

double max_distance(std::span<const Point> pts)
{
    double d = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b)
            d = std::max(d, (pts[a] - pts[b]).norm());
    return d;
}

bool parallel(const Point& u, const Point& w)
{
    const double scale = u.norm() * w.norm();
    if (u.size() == 2)
        return std::abs(u(0) * w(1) - u(1) * w(0)) <= 1e-12 * scale;
    const Eigen::Vector3d cu(u(0), u(1), u(2));
    const Eigen::Vector3d cw(w(0), w(1), w(2));
    return cu.cross(cw).norm() <= 1e-12 * scale;
}

} // namespace

FaceTable::FaceTable(std::vector<Face> faces) : faces_(std::move(faces))
{
    num_interior_ = static_cast<int>(std::count_if(faces_.begin(), faces_.end(),
                                                   [](const Face& f) { return f.is_interior(); }));
}

Point SimplexGeometry::tangent(int i, int j) const
{
    const Point& t = tangents[pair_index(i, j, dim)];
    return i < j ? t : Point(-t);
}

Point SimplexGeometry::to_cartesian(const Barycentric& lambda) const
{
    Point x = Point::Zero(dim);
    for (int i = 0; i <= dim; ++i)
        x += lambda[i] * vertices[i];
    return x;
}

Barycentric SimplexGeometry::to_barycentric(const Point& x) const
{
    Barycentric lambda{};
    double rest = 1.0;
    for (int i = 1; i <= dim; ++i)
    {
        lambda[i] = grad_lambda[i].dot(x - vertices[0]);
        rest -= lambda[i];
    }
    lambda[0] = rest;
    return lambda;
}

SimplexGeometry simplex_geometry(std::span<const Point> vertices)
{
    const int dim = static_cast<int>(vertices.size()) - 1;
    if (dim < 1 || dim > max_dim)
        throw GeometryError("simplex_geometry: unsupported dimension " + std::to_string(dim));

    SimplexGeometry g;
    g.dim = dim;
    for (int i = 0; i <= dim; ++i)
        g.vertices[i] = vertices[i];

    const Eigen::MatrixXd jac = edge_matrix(vertices);
    const double det          = jac.determinant();
    g.diameter                = max_distance(vertices);
    if (!(std::abs(det) > 1e-13 * std::pow(g.diameter, dim)))
        throw GeometryError("simplex_geometry: degenerate simplex");
    g.measure = std::abs(det) / factorial(dim);

    // Rows of J^{-1} are the gradients of lambda_1..lambda_n.
    const Eigen::MatrixXd inv = jac.inverse();
    Point sum                 = Point::Zero(dim);
    for (int i = 1; i <= dim; ++i)
    {
        g.grad_lambda[i] = inv.row(i - 1).transpose();
        sum += g.grad_lambda[i];
    }
    g.grad_lambda[0] = -sum;

    for (int p = 0; p < num_pairs(dim); ++p)
    {
        const auto [i, j]  = pair_vertices(p, dim);
        const Point e      = vertices[j] - vertices[i];
        g.edge_lengths[p]  = e.norm();
        g.tangents[p]      = e / g.edge_lengths[p];
    }

    for (int i = 0; i <= dim; ++i)
    {
        const double gn    = g.grad_lambda[i].norm();
        g.normals[i]       = -g.grad_lambda[i] / gn;
        g.face_measures[i] = dim * g.measure * gn;
    }
    return g;
}

SimplexGeometry simplex_geometry(const SimplicialMesh& mesh, int element)
{
    if (element < 0 || element >= mesh.num_elements())
        throw GeometryError("simplex_geometry: element id out of range");
    std::array<Point, 4> pts;
    const auto ids = mesh.element(element);
    for (int i = 0; i <= mesh.dim(); ++i)
        pts[i] = mesh.vertex(ids[i]);
    return simplex_geometry(std::span<const Point>(pts.data(), mesh.dim() + 1));
}

SimplicialMesh SimplicialMesh::from_elements(int dim, std::vector<Point> vertices,
                                             std::vector<Element> elements)
{
    if (dim != 2 && dim != 3)
        throw GeometryError("mesh: dimension must be 2 or 3");

    SimplicialMesh mesh;
    mesh.dim_      = dim;
    mesh.vertices_ = std::move(vertices);
    for (const Point& v : mesh.vertices_)
        if (v.size() != dim)
            throw GeometryError("mesh: vertex with wrong number of coordinates");

    const int nv = mesh.num_vertices();
    for (Element& el : elements)
    {
        for (int i = 0; i <= dim; ++i)
            if (el[i] < 0 || el[i] >= nv)
                throw GeometryError("mesh: element references unknown vertex");
        for (int i = dim + 1; i < 4; ++i)
            el[i] = -1;

        std::array<Point, 4> pts;
        for (int i = 0; i <= dim; ++i)
            pts[i] = mesh.vertices_[el[i]];
        const Eigen::MatrixXd jac = edge_matrix(std::span<const Point>(pts.data(), dim + 1));
        const double det          = jac.determinant();
        const double diam         = max_distance(std::span<const Point>(pts.data(), dim + 1));
        if (!(std::abs(det) > 1e-13 * std::pow(diam, dim)))
            throw GeometryError("mesh: degenerate element");
        if (det < 0)
            std::swap(el[0], el[1]);
    }
    mesh.elements_ = std::move(elements);

    // Faces keyed by sorted vertex tuples; ids follow key order.
    std::map<std::array<int, 3>, std::vector<std::pair<int, int>>> incidence;
    for (int e = 0; e < mesh.num_elements(); ++e)
    {
        for (int i = 0; i <= dim; ++i)
        {
            std::array<int, 3> key{-1, -1, -1};
            int c = 0;
            for (int j = 0; j <= dim; ++j)
                if (j != i)
                    key[c++] = mesh.elements_[e][j];
            std::sort(key.begin(), key.begin() + dim);
            incidence[key].emplace_back(e, i);
        }
    }

    std::vector<Face> faces;
    faces.reserve(incidence.size());
    mesh.element_faces_.assign(mesh.num_elements(), {-1, -1, -1, -1});
    for (auto& [key, adj] : incidence)
    {
        if (adj.size() > 2)
            throw GeometryError("mesh: face shared by more than two elements");
        std::sort(adj.begin(), adj.end());
        Face f;
        f.vertices = key;
        for (std::size_t s = 0; s < adj.size(); ++s)
        {
            f.elements[s]    = adj[s].first;
            f.local_index[s] = adj[s].second;
        }
        const SimplexGeometry g = simplex_geometry(mesh, adj[0].first);
        f.normal                = g.normals[adj[0].second];
        f.measure               = g.face_measures[adj[0].second];
        std::array<Point, 3> pts;
        for (int r = 0; r < dim; ++r)
            pts[r] = mesh.vertices_[key[r]];
        f.diameter = max_distance(std::span<const Point>(pts.data(), dim));

        const int id = static_cast<int>(faces.size());
        for (const auto& [e, i] : adj)
            mesh.element_faces_[e][i] = id;
        faces.push_back(std::move(f));
    }
    mesh.faces_ = FaceTable(std::move(faces));
    return mesh;
}

SimplicialMesh generate_uniform_mesh(int dim, int m)
{
    if (m < 1)
        throw ConfigError("generate_uniform_mesh: m must be at least 1");
    if (dim != 2 && dim != 3)
        throw ConfigError("generate_uniform_mesh: dim must be 2 or 3");

    const int np = m + 1;
    const double h = 1.0 / m;
    std::vector<Point> vertices;
    std::vector<SimplicialMesh::Element> elements;

    if (dim == 2)
    {
        auto id = [np](int i, int j) { return j * np + i; };
        vertices.reserve(np * np);
        for (int j = 0; j < np; ++j)
            for (int i = 0; i < np; ++i)
            {
                Point p(2);
                p << i * h, j * h;
                vertices.push_back(p);
            }
        elements.reserve(2 * m * m);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i)
            {
                const int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
                elements.push_back({v00, v10, v11, -1});
                elements.push_back({v00, v11, v01, -1});
            }
    }
    else
    {
        auto id = [np](int i, int j, int k) { return (k * np + j) * np + i; };
        vertices.reserve(np * np * np);
        for (int k = 0; k < np; ++k)
            for (int j = 0; j < np; ++j)
                for (int i = 0; i < np; ++i)
                {
                    Point p(3);
                    p << i * h, j * h, k * h;
                    vertices.push_back(p);
                }
        // Kuhn: one tetrahedron per monotone lattice path from (0,0,0) to (1,1,1).
        std::array<int, 3> perm{0, 1, 2};
        std::vector<std::array<int, 3>> paths;
        do
            paths.push_back(perm);
        while (std::next_permutation(perm.begin(), perm.end()));

        elements.reserve(6 * m * m * m);
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i)
                    for (const auto& path : paths)
                    {
                        std::array<int, 3> c{i, j, k};
                        SimplicialMesh::Element el{};
                        el[0] = id(c[0], c[1], c[2]);
                        for (int s = 0; s < 3; ++s)
                        {
                            ++c[path[s]];
                            el[s + 1] = id(c[0], c[1], c[2]);
                        }
                        elements.push_back(el);
                    }
    }
    return SimplicialMesh::from_elements(dim, std::move(vertices), std::move(elements));
}

bool is_strongly_regular(const SimplicialMesh& mesh)
{
    const int dim = mesh.dim();
    for (const Face& f : mesh.faces().all())
    {
        if (!f.is_interior())
            continue;
        const int a  = mesh.element(f.elements[0])[f.local_index[0]];
        const int ap = mesh.element(f.elements[1])[f.local_index[1]];
        for (int r = 0; r < dim; ++r)
        {
            const Point& v = mesh.vertex(f.vertices[r]);
            if (parallel(v - mesh.vertex(a), v - mesh.vertex(ap)))
                return false;
        }
    }
    return true;
}

SimplicialMesh reference_simplex_mesh(int dim)
{
    std::vector<Point> vertices;
    vertices.push_back(Point::Zero(dim));
    for (int i = 0; i < dim; ++i)
        vertices.push_back(Point::Unit(dim, i));
    SimplicialMesh::Element el{-1, -1, -1, -1};
    for (int i = 0; i <= dim; ++i)
        el[i] = i;
    return SimplicialMesh::from_elements(dim, std::move(vertices), {el});
}

std::string mesh_to_json(const SimplicialMesh& mesh)
{
    nlohmann::json j;
    j["dim"]      = mesh.dim();
    auto& verts   = j["vertices"] = nlohmann::json::array();
    for (const Point& v : mesh.vertices())
        verts.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    auto& elems = j["elements"] = nlohmann::json::array();
    for (int e = 0; e < mesh.num_elements(); ++e)
    {
        const auto ids = mesh.element(e);
        elems.push_back(std::vector<int>(ids.begin(), ids.end()));
    }
    return j.dump();
}

SimplicialMesh mesh_from_json(const std::string& text)
{
    try
    {
        const nlohmann::json j = nlohmann::json::parse(text);
        const int dim          = j.at("dim").get<int>();
        std::vector<Point> vertices;
        for (const auto& v : j.at("vertices"))
        {
            const auto coords = v.get<std::vector<double>>();
            Point p(static_cast<int>(coords.size()));
            for (std::size_t c = 0; c < coords.size(); ++c)
                p(c) = coords[c];
            vertices.push_back(p);
        }
        std::vector<SimplicialMesh::Element> elements;
        for (const auto& e : j.at("elements"))
        {
            const auto ids = e.get<std::vector<int>>();
            if (static_cast<int>(ids.size()) != dim + 1)
                throw GeometryError("mesh file: element with wrong number of vertices");
            SimplicialMesh::Element el{-1, -1, -1, -1};
            std::copy(ids.begin(), ids.end(), el.begin());
            elements.push_back(el);
        }
        return SimplicialMesh::from_elements(dim, std::move(vertices), std::move(elements));
    }
    catch (const nlohmann::json::exception& ex)
    {
        throw GeometryError(std::string("mesh file: ") + ex.what());
    }
}

void write_mesh(const SimplicialMesh& mesh, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << mesh_to_json(mesh) << '\n';
    if (!out)
        throw IoError("failed writing " + path);
}

SimplicialMesh read_mesh(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return mesh_from_json(ss.str());
}

} // namespace ipmix
