#include "voromesh/geometry/voronoi.hpp"

#include "voromesh/geometry/predicates.hpp"

namespace voromesh {

std::vector<Point2> VoronoiMesh::cell_polygon(VertexId generator) const {
    std::vector<Point2> poly;
    poly.reserve(cells[generator].size());
    for (TriangleId t : cells[generator]) poly.push_back(vertices[t]);
    return poly;
}

VoronoiMesh extract_voronoi(const DelaunayMesh& mesh) {
    const MeshTopology& topo = mesh.topology();
    const auto& pts = mesh.points();

    VoronoiMesh vor;
    vor.generation = topo.generation;
    vor.vertices.reserve(topo.triangles.size());
    for (const Triangle& t : topo.triangles)
        vor.vertices.push_back(circumcenter(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]]));

    vor.edge_of_dual.assign(topo.edges.size(), VoronoiMesh::kNoEdge);
    for (std::uint32_t i = 0; i < topo.edges.size(); ++i) {
        const Edge& e = topo.edges[i];
        if (e.is_hull()) continue;
        vor.edge_of_dual[i] = static_cast<std::uint32_t>(vor.edges.size());
        vor.edges.push_back({{e.tri[0], e.tri[1]}, i});
    }

    const std::size_t nv = mesh.num_vertices();
    vor.cells.resize(nv);
    vor.infinite_cell.assign(nv, false);
    for (VertexId v = 0; v < nv; ++v) {
        if (topo.on_hull[v]) {
            vor.infinite_cell[v] = true;
            continue;
        }
        const auto fan = topo.fan(v);
        vor.cells[v].assign(fan.begin(), fan.end());
    }
    return vor;
}

}  // namespace voromesh
