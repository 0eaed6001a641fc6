#pragma once

#include "geometry.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace wwc {

enum class VertexTag : int { interior = 0, surface = 1, bottom = 2, corner = 3 };

struct BottomEdge {
    int a, b;       ///< oriented along the bottom from p_l* to p_r*
    int segment;    ///< index of the polyline piece of gamma_b_star
};

/// Triangulation of the reference domain. Vertices 0..M are the collocation nodes of
/// the reference surface in order; extra surface vertices between them follow, then
/// bottom vertices, then interior vertices.
struct Mesh {
    std::vector<Vec2> xy;
    std::vector<VertexTag> tag;
    std::vector<std::array<int, 3>> tri;
    int n_surface = 0;                ///< number of collocation nodes, M + 1
    std::vector<int> surface;         ///< all surface vertices ordered from p_l* to p_r*
    std::vector<double> surface_param; ///< reference arclength of each surface vertex
    std::vector<int> bottom;          ///< bottom vertices ordered from p_l* to p_r*, corners included
    std::vector<double> bottom_param; ///< arclength along gamma_b_star
    std::vector<BottomEdge> bottom_edges;
    double h = 0.0;
    double grading = 1.0;

    int n_vertices() const { return static_cast<int>(xy.size()); }
    int n_triangles() const { return static_cast<int>(tri.size()); }
};

Mesh triangulate_reference(const ReferenceSurface& ref, double h, double grading);

struct MeshQuality {
    double min_angle = 0.0;           ///< over all triangles
    double min_angle_off_corner = 0.0; ///< excluding triangles touching a contact corner
    double max_edge = 0.0;
    double min_edge = 0.0;
    double corner_size = 0.0;         ///< mean edge length of triangles at the contact corners
};

MeshQuality mesh_quality(const Mesh& mesh);

void write_mesh(std::ostream& out, const Mesh& mesh);
/// Reads the vertex/element dump; bottom ordering is recovered from the reference geometry.
Mesh read_mesh(std::istream& in, const ReferenceSurface& ref);

}  // namespace wwc
