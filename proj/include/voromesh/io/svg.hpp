#pragma once

#include <optional>
#include <string>
#include <vector>

#include "voromesh/post/postprocess.hpp"
#include "voromesh/repair/topology_repair.hpp"
#include "voromesh/solver/solver.hpp"

namespace voromesh {

struct SvgOptions {
    bool delaunay = true;
    bool voronoi = true;
    bool polyline = true;
    bool defects = true;
    /// Drawn region; defaults to the state's frame or the vertex bounding box.
    std::optional<BoundingBox> view;
    double width_px = 1000.0;
    std::string title;
};

/// SVG 1.1 document of an iteration state. Each enabled layer is a <g> with
/// id "delaunay", "voronoi", "polyline" or "defects"; empty layers are omitted.
std::string render_svg(const IterationState& state, const std::vector<DefectPolygon>& defects,
                       const SvgOptions& options = {});

/// Hybrid mesh: cells shaded by subdomain in the "voronoi" layer plus the
/// boundary polyline. The delaunay and defects layers do not apply.
std::string render_svg(const HybridMesh& mesh, const SvgOptions& options = {});

}  // namespace voromesh
