#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "voromesh/geometry/delaunay.hpp"

namespace voromesh {

/// Voronoi edge joining the circumcenters of the two triangles of an interior
/// Delaunay edge. May have zero length when those triangles are cocircular.
struct VoronoiEdge {
    std::array<TriangleId, 2> vertices;  // indices into VoronoiMesh::vertices
    std::uint32_t dual_edge;              // index into MeshTopology::edges
};

/// Dual of a DelaunayMesh: one Voronoi vertex per finite triangle.
struct VoronoiMesh {
    std::vector<Point2> vertices;
    std::vector<VoronoiEdge> edges;
    /// Delaunay edge index -> Voronoi edge index, or kNoEdge for hull edges.
    std::vector<std::uint32_t> edge_of_dual;
    /// Per generator: counterclockwise cycle of Voronoi vertex ids. Empty for
    /// hull generators, whose cells are unbounded.
    std::vector<std::vector<TriangleId>> cells;
    std::vector<bool> infinite_cell;
    std::uint64_t generation = 0;

    static constexpr std::uint32_t kNoEdge = 0xffffffffu;

    double edge_length(std::uint32_t e) const {
        return distance(vertices[edges[e].vertices[0]], vertices[edges[e].vertices[1]]);
    }
    std::vector<Point2> cell_polygon(VertexId generator) const;
};

VoronoiMesh extract_voronoi(const DelaunayMesh& mesh);

}  // namespace voromesh
