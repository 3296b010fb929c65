#include "voromesh/post/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include "voromesh/errors.hpp"

namespace voromesh {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void attach(std::uint32_t child, std::uint32_t root) { parent_[child] = root; }

private:
    std::vector<std::uint32_t> parent_;
};

// Cyclic sequence with consecutive repeats removed.
template <class T>
void drop_cyclic_repeats(std::vector<T>& seq) {
    seq.erase(std::unique(seq.begin(), seq.end()), seq.end());
    while (seq.size() > 1 && seq.front() == seq.back()) seq.pop_back();
}

}  // namespace

bool is_convex(const std::vector<Point2>& polygon, double tol_rad) {
    if (polygon.size() < 3) return false;
    Point2 lo = polygon[0], hi = polygon[0];
    for (const Point2& p : polygon) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    const double merge = 1e-9 * distance(lo, hi);
    std::vector<Point2> pts;
    for (const Point2& p : polygon)
        if (pts.empty() || distance(pts.back(), p) > merge) pts.push_back(p);
    while (pts.size() > 1 && distance(pts.front(), pts.back()) <= merge) pts.pop_back();
    if (pts.size() < 3) return false;

    double total = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const Vec2 a = pts[(k + 1) % pts.size()] - pts[k];
        const Vec2 b = pts[(k + 2) % pts.size()] - pts[(k + 1) % pts.size()];
        const double turn = std::atan2(cross(a, b), dot(a, b));
        if (turn < -tol_rad) return false;
        total += turn;
    }
    return std::abs(total - 2 * std::numbers::pi) < 1e-6;
}

HybridMesh collapse_short_edges(const VoronoiMesh& voronoi, const DelaunayMesh& mesh, const BoundaryBand& band,
                                const SizingField& sizing, const CollapseOptions& options) {
    if (!(options.delta >= 0.0)) throw InputError("collapse_short_edges: delta must be nonnegative");
    const std::size_t nv = voronoi.vertices.size();
    std::vector<Point2> pos = voronoi.vertices;
    DisjointSets sets(nv);

    std::vector<VertexId> finite;
    for (VertexId g = 0; g < voronoi.cells.size(); ++g)
        if (!voronoi.cells[g].empty() && !voronoi.infinite_cell[g]) finite.push_back(g);
    // Finite cells touching each cluster, keyed by cluster root.
    std::vector<std::vector<std::uint32_t>> cells_of(nv);
    for (std::uint32_t c = 0; c < finite.size(); ++c)
        for (TriangleId t : voronoi.cells[finite[c]]) cells_of[t].push_back(c);

    std::vector<bool> in_band(nv, false);
    for (TriangleId t : band.band_triangles) in_band[t] = true;

    struct Candidate {
        double length;
        std::uint32_t edge;
    };
    std::vector<Candidate> candidates;
    for (std::uint32_t e = 0; e < voronoi.edges.size(); ++e) {
        const auto [a, b] = voronoi.edges[e].vertices;
        const double len = voronoi.edge_length(e);
        const bool in_scope = options.scope == CollapseScope::kAll || (in_band[a] && in_band[b]);
        if (len == 0.0 || (in_scope && len < options.delta * sizing(midpoint(pos[a], pos[b]))))
            candidates.push_back({len, e});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        return x.length != y.length ? x.length < y.length : x.edge < y.edge;
    });

    HybridMesh out;
    out.collapse.candidates = candidates.size();
    std::vector<Point2> poly;
    std::vector<std::uint32_t> ids;
    for (const Candidate& cand : candidates) {
        const auto [a, b] = voronoi.edges[cand.edge].vertices;
        std::uint32_t ra = sets.find(a), rb = sets.find(b);
        if (ra == rb) continue;
        if (rb < ra) std::swap(ra, rb);
        const Point2 merged = midpoint(pos[ra], pos[rb]);
        // Zero-length edges come first, so their clusters have not moved yet.
        bool accept = cand.length == 0.0;
        if (!accept) {
            std::vector<std::uint32_t> affected = cells_of[ra];
            affected.insert(affected.end(), cells_of[rb].begin(), cells_of[rb].end());
            std::sort(affected.begin(), affected.end());
            affected.erase(std::unique(affected.begin(), affected.end()), affected.end());
            accept = true;
            for (std::uint32_t c : affected) {
                ids.clear();
                for (TriangleId t : voronoi.cells[finite[c]]) {
                    const std::uint32_t r = sets.find(t);
                    ids.push_back(r == rb ? ra : r);
                }
                drop_cyclic_repeats(ids);
                poly.clear();
                for (std::uint32_t r : ids) poly.push_back(r == ra ? merged : pos[r]);
                if (!is_convex(poly)) {
                    accept = false;
                    break;
                }
            }
        }
        if (!accept) {
            ++out.collapse.skipped_nonconvex;
            continue;
        }
        sets.attach(rb, ra);
        pos[ra] = merged;
        cells_of[ra].insert(cells_of[ra].end(), cells_of[rb].begin(), cells_of[rb].end());
        cells_of[rb].clear();
        ++out.collapse.merged;
    }

    // Compact the surviving clusters in increasing root order.
    std::vector<std::uint32_t> root(nv);
    std::vector<bool> used(nv, false);
    for (std::uint32_t t = 0; t < nv; ++t) root[t] = sets.find(t);
    for (VertexId g : finite)
        for (TriangleId t : voronoi.cells[g]) used[root[t]] = true;
    for (const BandChain& chain : band.chains)
        for (TriangleId t : chain.triangles) used[root[t]] = true;
    std::vector<std::uint32_t> compact(nv, kNoIndex);
    for (std::uint32_t r = 0; r < nv; ++r) {
        if (!used[r]) continue;
        compact[r] = static_cast<std::uint32_t>(out.vertices.size());
        out.vertices.push_back(pos[r]);
    }

    for (VertexId g : finite) {
        HybridCell cell;
        cell.generator = g;
        cell.site = mesh.point(g);
        cell.subdomain = band.sign[g] < 0 ? 1 : 0;
        for (TriangleId t : voronoi.cells[g]) cell.vertices.push_back(compact[root[t]]);
        drop_cyclic_repeats(cell.vertices);
        out.cells.push_back(std::move(cell));
    }
    for (const BandChain& chain : band.chains) {
        PolylineChain pc;
        pc.closed = chain.closed;
        for (TriangleId t : chain.triangles) pc.vertices.push_back(compact[root[t]]);
        pc.vertices.erase(std::unique(pc.vertices.begin(), pc.vertices.end()), pc.vertices.end());
        if (pc.closed)
            while (pc.vertices.size() > 1 && pc.vertices.front() == pc.vertices.back()) pc.vertices.pop_back();
        if (!pc.vertices.empty()) out.boundary.push_back(std::move(pc));
    }
    return out;
}

std::vector<Point2> cell_polygon(const HybridMesh& mesh, const HybridCell& cell) {
    std::vector<Point2> out;
    out.reserve(cell.vertices.size());
    for (std::uint32_t v : cell.vertices) out.push_back(mesh.vertices[v]);
    return out;
}

std::vector<Subdomain> extract_subdomains(const HybridMesh& mesh, const ImplicitDomain& domain) {
    std::array<Subdomain, 2> groups{{{0, {}}, {1, {}}}};
    for (std::uint32_t c = 0; c < mesh.cells.size(); ++c)
        groups[domain.eval_u(mesh.cells[c].site) < 0.0 ? 1 : 0].cells.push_back(c);
    std::vector<Subdomain> out;
    for (Subdomain& g : groups)
        if (!g.cells.empty()) out.push_back(std::move(g));
    return out;
}

double distance_to_boundary(const ImplicitDomain& domain, Point2 x) {
    try {
        return distance(x, domain.project_to_boundary(x));
    } catch (const ProjectionError&) {
    } catch (const VanishingGradientError&) {
    }
    const double u = std::abs(domain.eval_u(x));
    try {
        return u / norm(domain.eval_grad(x));
    } catch (const VanishingGradientError&) {
        return u;
    }
}

QualityReport quality_report(const HybridMesh& hybrid, const BoundaryBand& band, const DelaunayMesh& mesh,
                             const ImplicitDomain& domain, const SizingField& sizing, double delta) {
    QualityReport q;
    q.collapse = hybrid.collapse;

    std::vector<std::uint32_t> poly_vertices;
    std::size_t midpoints = 0;
    for (const PolylineChain& chain : hybrid.boundary) {
        const std::size_t n = chain.vertices.size();
        const std::size_t segments = chain.closed ? (n > 1 ? n : 0) : n - 1;
        for (std::size_t k = 0; k < segments; ++k) {
            const Point2 m = midpoint(hybrid.vertices[chain.vertices[k]], hybrid.vertices[chain.vertices[(k + 1) % n]]);
            const double d = distance_to_boundary(domain, m) / sizing(m);
            q.midpoint_distance_max = std::max(q.midpoint_distance_max, d);
            q.midpoint_distance_mean += d;
            ++midpoints;
        }
        poly_vertices.insert(poly_vertices.end(), chain.vertices.begin(), chain.vertices.end());
    }
    std::sort(poly_vertices.begin(), poly_vertices.end());
    poly_vertices.erase(std::unique(poly_vertices.begin(), poly_vertices.end()), poly_vertices.end());
    for (std::uint32_t v : poly_vertices) {
        const Point2 x = hybrid.vertices[v];
        const double d = distance_to_boundary(domain, x) / sizing(x);
        q.vertex_distance_max = std::max(q.vertex_distance_max, d);
        q.vertex_distance_mean += d;
    }
    if (!poly_vertices.empty()) q.vertex_distance_mean /= static_cast<double>(poly_vertices.size());
    if (midpoints > 0) q.midpoint_distance_mean /= static_cast<double>(midpoints);

    for (std::uint32_t i = 0; i < band.crossing.size(); ++i) {
        const CrossingEdge& ce = band.crossing[i];
        if (!ce.resolved) continue;
        const double dev = normal_deviation_deg(band, mesh, i);
        ++q.crossing_edges;
        if (dev <= 10.0) ++q.crossing_aligned_within_10deg;
        if (!ce.stable) continue;
        ++q.stable_crossing_edges;
        if (dev <= 10.0) ++q.aligned_within_10deg;
        q.angle_histogram[std::min<std::size_t>(static_cast<std::size_t>(dev / 5.0), 17)]++;
    }

    for (const BandPolygon& p : band_polygons(band, mesh, domain, sizing)) {
        ++q.band_polygons;
        if (p.at_corner)
            ++q.corner_band_polygons;
        else if (p.sides != 4)
            ++q.non_quad_band_polygons;
    }

    q.cells = hybrid.cells.size();
    q.cell_quality_min = hybrid.cells.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (const HybridCell& cell : hybrid.cells) {
        double r_in = std::numeric_limits<double>::infinity(), r_out = 0.0;
        const std::size_t n = cell.vertices.size();
        for (std::size_t k = 0; k < n; ++k) {
            const std::uint32_t i = cell.vertices[k], j = cell.vertices[(k + 1) % n];
            const Point2 a = hybrid.vertices[i], b = hybrid.vertices[j];
            r_out = std::max(r_out, distance(a, cell.site));
            const double len = distance(a, b);
            if (len > 0.0) r_in = std::min(r_in, cross(b - a, cell.site - a) / len);
            edges.insert({std::min(i, j), std::max(i, j)});
        }
        const double quality = r_out > 0.0 && std::isfinite(r_in) ? std::max(0.0, r_in) / r_out : 0.0;
        q.cell_quality_min = std::min(q.cell_quality_min, quality);
        q.cell_quality_mean += quality;
    }
    if (!hybrid.cells.empty()) q.cell_quality_mean /= static_cast<double>(hybrid.cells.size());

    q.shortest_edge = edges.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (const auto& [i, j] : edges) {
        const Point2 a = hybrid.vertices[i], b = hybrid.vertices[j];
        const double rel = distance(a, b) / sizing(midpoint(a, b));
        q.shortest_edge = std::min(q.shortest_edge, rel);
        if (rel < delta) ++q.short_edges;
    }

    for (const CornerSummit& cs : domain.corners()) {
        double best = std::numeric_limits<double>::infinity();
        for (std::uint32_t v : poly_vertices) best = std::min(best, distance(hybrid.vertices[v], cs.position));
        q.corners.push_back({cs.position, best / sizing(cs.position)});
    }
    return q;
}

}  // namespace voromesh
