#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ipmix/types.hpp"

namespace ipmix
{

/// One (n-1)-face of the triangulation.
struct Face
{
    std::array<int, 3> vertices{-1, -1, -1}; ///< sorted global vertex ids (dim entries used)
    Point normal;                            ///< global unit normal nu_F
    double diameter = 0.0;                   ///< h_F, max vertex distance
    double measure  = 0.0;                   ///< |F|
    std::array<int, 2> elements{-1, -1};     ///< adjacent elements, lower id first
    std::array<int, 2> local_index{-1, -1};  ///< index of F inside each adjacent element

    bool is_interior() const { return elements[1] >= 0; }
};

class FaceTable
{
  public:
    FaceTable() = default;
    explicit FaceTable(std::vector<Face> faces);

    int size() const { return static_cast<int>(faces_.size()); }
    int num_interior() const { return num_interior_; }
    int num_boundary() const { return size() - num_interior_; }

    const Face& operator[](int f) const { return faces_[f]; }
    std::span<const Face> all() const { return faces_; }

  private:
    std::vector<Face> faces_;
    int num_interior_ = 0;
};

/// Triangulation of a polyhedral domain by simplices. Immutable after
/// construction; elements are stored positively oriented.
class SimplicialMesh
{
  public:
    using Element = std::array<int, 4>;

    /// Validates the elements, fixes orientation and builds the face table.
    /// Throws GeometryError for degenerate elements, bad ids, or faces
    /// shared by more than two elements.
    static SimplicialMesh from_elements(int dim, std::vector<Point> vertices,
                                        std::vector<Element> elements);

    int dim() const { return dim_; }
    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_elements() const { return static_cast<int>(elements_.size()); }

    const Point& vertex(int v) const { return vertices_[v]; }
    std::span<const Point> vertices() const { return vertices_; }

    /// Global vertex ids of element e (dim+1 entries).
    std::span<const int> element(int e) const { return {elements_[e].data(), std::size_t(dim_ + 1)}; }

    /// Global face id of the face opposite local vertex i of element e.
    int element_face(int e, int i) const { return element_faces_[e][i]; }

    const FaceTable& faces() const { return faces_; }

  private:
    int dim_ = 0;
    std::vector<Point> vertices_;
    std::vector<Element> elements_;
    std::vector<std::array<int, 4>> element_faces_;
    FaceTable faces_;
};

/// Per-element barycentric geometry. Entries beyond dim+1 vertices or
/// num_pairs(dim) edges are unused.
struct SimplexGeometry
{
    int dim = 0;
    std::array<Point, 4> vertices;
    std::array<Point, 4> grad_lambda;
    std::array<Point, 6> tangents; ///< t_ij for pair (i<j), pointing from a_i to a_j
    std::array<double, 6> edge_lengths{};
    std::array<Point, 4> normals; ///< outward unit normal of the face opposite vertex i
    std::array<double, 4> face_measures{};
    double measure  = 0.0;
    double diameter = 0.0;

    /// Unit tangent from a_i to a_j for any i != j.
    Point tangent(int i, int j) const;
    double edge_length(int i, int j) const { return edge_lengths[pair_index(i, j, dim)]; }

    Point to_cartesian(const Barycentric& lambda) const;
    Barycentric to_barycentric(const Point& x) const;
};

/// Geometry of an arbitrary simplex given its dim+1 vertices.
SimplexGeometry simplex_geometry(std::span<const Point> vertices);
SimplexGeometry simplex_geometry(const SimplicialMesh& mesh, int element);

/// Unit square / cube split into m^dim boxes; squares are cut along the
/// (0,0)-(1,1) diagonal, cubes into the six Kuhn tetrahedra sharing the
/// main diagonal.
SimplicialMesh generate_uniform_mesh(int dim, int m);

/// For every interior face F = K cap K' with opposite vertices a, a' and every
/// vertex v of F, the vectors v - a and v - a' are not parallel.
bool is_strongly_regular(const SimplicialMesh& mesh);

/// Reference simplex with vertices 0, e_1, ..., e_n as a one-element mesh.
SimplicialMesh reference_simplex_mesh(int dim);

std::string mesh_to_json(const SimplicialMesh& mesh);
SimplicialMesh mesh_from_json(const std::string& text);
void write_mesh(const SimplicialMesh& mesh, const std::string& path);
SimplicialMesh read_mesh(const std::string& path);

} // namespace ipmix
