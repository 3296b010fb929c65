#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "voromesh/domain/implicit_domain.hpp"
#include "voromesh/domain/sizing.hpp"
#include "voromesh/geometry/delaunay.hpp"
#include "voromesh/geometry/voronoi.hpp"
#include "voromesh/repair/topology_repair.hpp"

namespace voromesh {

/// Convex polygonal cell of the final mesh.
struct HybridCell {
    std::vector<std::uint32_t> vertices;  // counterclockwise, indices into HybridMesh::vertices
    VertexId generator = kNoVertex;
    Point2 site;
    /// 1 where u(site) < 0, else 0.
    int subdomain = 0;
};

/// Run of polyline vertices; closed chains do not repeat the first vertex.
struct PolylineChain {
    std::vector<std::uint32_t> vertices;
    bool closed = false;
};

struct CollapseStats {
    std::size_t candidates = 0;
    std::size_t merged = 0;
    std::size_t skipped_nonconvex = 0;
};

struct HybridMesh {
    std::vector<Point2> vertices;
    std::vector<HybridCell> cells;
    std::vector<PolylineChain> boundary;
    CollapseStats collapse;
};

enum class CollapseScope {
    kBand,  // only Voronoi edges whose two vertices are band triangles
    kAll,
};

struct CollapseOptions {
    double delta = 0.05;  // threshold in units of h at the edge midpoint
    CollapseScope scope = CollapseScope::kBand;
};

/// Merges the endpoints of Voronoi edges shorter than delta * h, shortest
/// first, to their mean. Zero-length edges merge regardless of scope. A merge
/// that would make an incident finite cell non-convex is skipped. Cells of
/// hull generators are unbounded and left out.
HybridMesh collapse_short_edges(const VoronoiMesh& voronoi, const DelaunayMesh& mesh, const BoundaryBand& band,
                                const SizingField& sizing, const CollapseOptions& options = {});

/// Interior angles at most 180 degrees plus tol_rad; vertices closer than
/// 1e-12 of the polygon size are treated as one.
bool is_convex(const std::vector<Point2>& polygon, double tol_rad = 1e-9);

std::vector<Point2> cell_polygon(const HybridMesh& mesh, const HybridCell& cell);

struct Subdomain {
    int tag = 0;
    std::vector<std::uint32_t> cells;  // indices into HybridMesh::cells
};

/// Cells grouped by the sign of u at their site, in increasing tag order.
/// Only non-empty groups are returned.
std::vector<Subdomain> extract_subdomains(const HybridMesh& mesh, const ImplicitDomain& domain);

struct CornerDistance {
    Point2 summit;
    double distance = 0.0;  // to the nearest polyline vertex, units of h
};

struct QualityReport {
    // Distances to Gamma in units of local h.
    double vertex_distance_max = 0.0;
    double vertex_distance_mean = 0.0;
    double midpoint_distance_max = 0.0;
    double midpoint_distance_mean = 0.0;
    /// Angle between stable crossing edges and the normal, 5 degree bins over [0, 90].
    std::array<std::size_t, 18> angle_histogram{};
    std::size_t stable_crossing_edges = 0;
    std::size_t aligned_within_10deg = 0;
    /// Same count over every resolved crossing edge, stable or not.
    std::size_t crossing_edges = 0;
    std::size_t crossing_aligned_within_10deg = 0;
    std::size_t band_polygons = 0;
    std::size_t non_quad_band_polygons = 0;  // excluding corner fans
    std::size_t corner_band_polygons = 0;
    /// Inscribed over circumscribed radius about the site.
    double cell_quality_min = 0.0;
    double cell_quality_mean = 0.0;
    std::size_t cells = 0;
    /// Output edges shorter than delta * h, and the shortest edge in units of h.
    std::size_t short_edges = 0;
    double shortest_edge = 0.0;
    CollapseStats collapse;
    std::vector<CornerDistance> corners;
};

QualityReport quality_report(const HybridMesh& hybrid, const BoundaryBand& band, const DelaunayMesh& mesh,
                             const ImplicitDomain& domain, const SizingField& sizing, double delta = 0.05);

/// Distance from x to its projection onto Gamma, or |u| / |grad u| when the projection fails.
double distance_to_boundary(const ImplicitDomain& domain, Point2 x);

}  // namespace voromesh
