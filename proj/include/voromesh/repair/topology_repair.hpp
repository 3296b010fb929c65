#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "voromesh/domain/implicit_domain.hpp"
#include "voromesh/domain/sizing.hpp"
#include "voromesh/geometry/delaunay.hpp"
#include "voromesh/geometry/voronoi.hpp"
#include "voromesh/solver/config.hpp"

namespace voromesh {

inline constexpr std::uint32_t kNoIndex = 0xffffffffu;

/// Delaunay edge whose endpoints lie on opposite sides of Gamma.
struct CrossingEdge {
    std::uint32_t edge = kNoIndex;          // index into MeshTopology::edges
    std::uint32_t voronoi_edge = kNoIndex;  // dual; kNoIndex on the hull
    /// Touching point and normal were computed; only resolved edges enter the polyline.
    bool resolved = false;
    bool stable = false;
    Point2 touching;
    Vec2 normal;
};

/// Ordered run of crossing edges linked through the triangles they share.
/// triangles[k] lies between crossings[k] and crossings[k + 1] (cyclically when closed).
struct BandChain {
    std::vector<std::uint32_t> crossings;  // indices into BoundaryBand::crossing
    std::vector<TriangleId> triangles;
    bool closed = false;
};

struct BoundaryBand {
    std::uint64_t generation = 0;
    /// Per vertex: -1 where u < 0, +1 otherwise (|u| < 1e-12 counts as positive).
    std::vector<std::int8_t> sign;
    /// Sorted by Delaunay edge index.
    std::vector<CrossingEdge> crossing;
    /// Delaunay edge index -> position in `crossing`, or kNoIndex.
    std::vector<std::uint32_t> crossing_of_edge;
    /// Triangles whose circumcenter is within band_factor * h of Gamma.
    std::vector<TriangleId> band_triangles;
    std::vector<VertexId> near_boundary_vertices;
    std::vector<BandChain> chains;

    std::size_t polyline_size() const;
};

/// Delaunay polygon between two consecutive stable crossing edges. The
/// negative-side and positive-side chains run from the first stable edge to
/// the second one.
struct BandPolygon {
    std::uint32_t first = kNoIndex;  // crossing index of the opening stable edge
    std::uint32_t last = kNoIndex;   // crossing index of the closing stable edge
    std::vector<TriangleId> triangles;
    std::vector<VertexId> negative_chain;
    std::vector<VertexId> positive_chain;
    /// Number of polygon sides, triangles + 2.
    int sides = 0;
    /// Fan around one vertex next to a sharp corner of Gamma.
    bool at_corner = false;
};

enum class DefectKind {
    kPentagon,
    kHexagon,
    kMisaligned,    // stable edge deviating from the normal by more than angle_tol
    kUnresolvable,  // polygon with more than six sides
};

const char* to_string(DefectKind kind);

struct DefectPolygon {
    DefectKind kind = DefectKind::kPentagon;
    std::uint32_t first = kNoIndex;  // crossing indices bounding the polygon
    std::uint32_t last = kNoIndex;
    std::vector<TriangleId> triangles;
    int sides = 0;
    std::vector<Point2> insertions;
};

/// Sign classification, crossing edges with touching points and normals,
/// band triangles and the ordered chains of crossing edges.
BoundaryBand classify(const DelaunayMesh& mesh, const VoronoiMesh& voronoi, const ImplicitDomain& domain,
                      const SizingField& sizing, const SolverConfig& cfg);

/// Splits every chain at its stable edges. A closed chain without stable
/// edges yields no polygons.
std::vector<BandPolygon> band_polygons(const BoundaryBand& band, const DelaunayMesh& mesh,
                                       const ImplicitDomain& domain, const SizingField& sizing);

/// Angle between the Delaunay edge and the normal of its dual, in degrees (0..90).
double normal_deviation_deg(const BoundaryBand& band, const DelaunayMesh& mesh, std::uint32_t crossing_index);

std::vector<DefectPolygon> detect_defects(const BoundaryBand& band, const DelaunayMesh& mesh,
                                          const ImplicitDomain& domain, const SizingField& sizing,
                                          const SolverConfig& cfg);

struct RefineResult {
    std::vector<VertexId> inserted;
    std::vector<std::string> skipped;  // one diagnostic per rejected insertion point
};

/// Inserts the proposed points of every defect. Rejected points are reported, not thrown.
RefineResult refine(DelaunayMesh& mesh, const std::vector<DefectPolygon>& defects);

}  // namespace voromesh
