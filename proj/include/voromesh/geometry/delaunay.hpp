#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "voromesh/geometry/vec2.hpp"

namespace voromesh {

using VertexId = std::uint32_t;
using TriangleId = std::uint32_t;

inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();
inline constexpr TriangleId kNoTriangle = std::numeric_limits<TriangleId>::max();

/// Counterclockwise vertex triple of a finite triangle.
struct Triangle {
    std::array<VertexId, 3> v;
};

/// Undirected Delaunay edge with its one (hull) or two (interior) incident triangles.
/// `tri[0]` is the triangle in which the edge runs v[0] -> v[1] counterclockwise.
struct Edge {
    std::array<VertexId, 2> v;
    std::array<TriangleId, 2> tri{kNoTriangle, kNoTriangle};
    std::array<VertexId, 2> opposite{kNoVertex, kNoVertex};

    bool is_hull() const { return tri[1] == kNoTriangle; }
    VertexId other(VertexId x) const { return v[0] == x ? v[1] : v[0]; }
};

/// Read-only connectivity view of a DelaunayMesh at one generation.
struct MeshTopology {
    std::vector<Triangle> triangles;
    std::vector<Edge> edges;
    /// CSR: edges incident to vertex i are vertex_edges[vertex_edge_offsets[i] .. [i+1]].
    std::vector<std::uint32_t> vertex_edge_offsets;
    std::vector<std::uint32_t> vertex_edges;
    /// CSR of incident triangles, counterclockwise around the vertex. For hull
    /// vertices the fan is open and starts right after the outer face.
    std::vector<std::uint32_t> vertex_triangle_offsets;
    std::vector<TriangleId> vertex_triangles;
    std::vector<bool> on_hull;
    std::uint64_t generation = 0;

    std::span<const std::uint32_t> star_edges(VertexId v) const {
        return {vertex_edges.data() + vertex_edge_offsets[v],
                vertex_edges.data() + vertex_edge_offsets[v + 1]};
    }
    std::span<const TriangleId> fan(VertexId v) const {
        return {vertex_triangles.data() + vertex_triangle_offsets[v],
                vertex_triangles.data() + vertex_triangle_offsets[v + 1]};
    }
    std::size_t interior_edge_count() const;
};

/// Delaunay triangulation of a point set with stable vertex ids.
///
/// The convex hull is closed by ghost triangles sharing a symbolic vertex at
/// infinity, so points outside the current hull are handled by the same flip
/// machinery as interior ones. Cocircular ties pick the diagonal incident to
/// the smallest vertex id, which makes the result independent of flip order.
class DelaunayMesh {
public:
    DelaunayMesh() = default;

    /// Throws InputError for fewer than 3 points, non-finite or all-collinear
    /// input; DuplicateVertexError for points closer than 1e-12 * bbox diagonal.
    static DelaunayMesh build(std::span<const Point2> points);

    /// Adds a point strictly inside the hull; returns its id (== previous vertex count).
    VertexId insert_vertex(Point2 p);

    /// Applies per-vertex displacements and restores the Delaunay property by
    /// flips, or by a full rebuild when triangles fold over or the flip count
    /// exceeds 10 * n.
    void move_vertices(std::span<const Vec2> displacements);

    /// Replaces all coordinates at once; same relegalization as move_vertices.
    void set_positions(std::span<const Point2> positions);

    std::size_t num_vertices() const { return points_.size(); }
    const std::vector<Point2>& points() const { return points_; }
    Point2 point(VertexId v) const { return points_[v]; }
    std::uint64_t generation() const { return generation_; }

    /// Connectivity snapshot, rebuilt lazily after each mutation.
    const MeshTopology& topology() const;

    /// Flips performed by the last move_vertices call, and whether it fell
    /// back to a full rebuild.
    std::size_t last_flip_count() const { return last_flips_; }
    bool last_move_rebuilt() const { return last_rebuilt_; }

private:
    enum class Where { kInside, kOnEdge, kOnVertex, kOutside };
    struct Location {
        TriangleId tri = kNoTriangle;
        Where where = Where::kInside;
        int index = -1;  // edge (opposite vertex index) or vertex index within tri
    };

    bool is_ghost(TriangleId t) const;
    int index_of(TriangleId t, VertexId v) const;
    int neighbor_index(TriangleId t, TriangleId nb) const;
    void set_triangle(TriangleId t, VertexId a, VertexId b, VertexId c);
    TriangleId new_triangle();
    void relink(TriangleId nb, TriangleId from, TriangleId to);

    Location locate(Point2 p, TriangleId hint) const;
    void check_near_duplicate(const Location& loc, Point2 p, double tol) const;
    VertexId insert_located(VertexId id, const Location& loc);
    void split_triangle(TriangleId t, VertexId p, std::vector<std::pair<TriangleId, int>>& stack);
    void split_edge(TriangleId t, int k, VertexId p, std::vector<std::pair<TriangleId, int>>& stack);
    bool should_flip(TriangleId t, int k) const;
    void flip(TriangleId t, int k);
    void legalize(std::vector<std::pair<TriangleId, int>>& stack);
    void rebuild_from_points();
    void initialize(std::span<const VertexId> order);
    void relegalize_after_move();

    std::vector<Point2> points_;
    std::vector<std::array<VertexId, 3>> tri_vertices_;
    std::vector<std::array<TriangleId, 3>> tri_neighbors_;  // neighbor opposite vertex k
    std::vector<TriangleId> vertex_triangle_;
    TriangleId last_ = kNoTriangle;
    double duplicate_tol_ = 0.0;
    std::uint64_t generation_ = 0;
    std::size_t last_flips_ = 0;
    bool last_rebuilt_ = false;

    mutable std::shared_ptr<const MeshTopology> topology_;
};

}  // namespace voromesh
