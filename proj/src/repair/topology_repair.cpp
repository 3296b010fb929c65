#include "voromesh/repair/topology_repair.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "voromesh/errors.hpp"

namespace voromesh {

namespace {

constexpr double kSignEpsilon = 1e-12;
// Polygons and edges this close to a sharp corner (in units of h) are corner
// fans, which are legitimately not quads.
constexpr double kCornerReach = 1.5;

std::uint32_t find_edge(const MeshTopology& topo, VertexId a, VertexId b) {
    for (std::uint32_t e : topo.star_edges(a)) {
        const Edge& ed = topo.edges[e];
        if (ed.other(a) == b) return e;
    }
    return kNoIndex;
}

// The other crossing edge of triangle t, given one crossing edge of it.
std::uint32_t next_crossing(const MeshTopology& topo, const BoundaryBand& band, TriangleId t, std::uint32_t edge) {
    const Edge& ed = topo.edges[edge];
    VertexId z = kNoVertex;
    for (VertexId v : topo.triangles[t].v)
        if (v != ed.v[0] && v != ed.v[1]) z = v;
    for (VertexId x : ed.v) {
        if (band.sign[x] != band.sign[z]) {
            const std::uint32_t e = find_edge(topo, x, z);
            if (e != kNoIndex) return band.crossing_of_edge[e];
        }
    }
    return kNoIndex;
}

// Unit normal at the touching point. At a corner summit the gradient is
// undefined, so the direction from the summit towards the midpoint is used.
Vec2 touching_normal(const ImplicitDomain& domain, Point2 c, Point2 touching) {
    const double diag = domain.box().diagonal();
    const Vec2 off = c - touching;
    if (norm(off) > 1e-9 * diag) {
        for (const CornerSummit& cs : domain.corners()) {
            if (distance(cs.position, touching) < 1e-7 * diag) {
                const Vec2 dir = off / norm(off);
                return domain.eval_u(c) < 0 ? -dir : dir;
            }
        }
    }
    const Vec2 g = domain.eval_grad(touching);
    return g / norm(g);
}

TriangleId other_triangle(const Edge& ed, TriangleId t) { return ed.tri[0] == t ? ed.tri[1] : ed.tri[0]; }

void build_chains(const MeshTopology& topo, BoundaryBand& band) {
    std::vector<bool> visited(band.crossing.size(), false);
    auto walk = [&](std::uint32_t start, TriangleId through, bool closed) {
        BandChain chain;
        chain.closed = closed;
        std::uint32_t cur = start;
        TriangleId t = through;
        for (;;) {
            visited[cur] = true;
            chain.crossings.push_back(cur);
            if (t == kNoTriangle) break;
            const std::uint32_t nxt = next_crossing(topo, band, t, band.crossing[cur].edge);
            if (nxt == kNoIndex) break;
            if (nxt == start) {
                chain.triangles.push_back(t);
                break;
            }
            if (visited[nxt]) break;
            chain.triangles.push_back(t);
            cur = nxt;
            t = other_triangle(topo.edges[band.crossing[cur].edge], t);
        }
        // A chain that failed to close is reported as open.
        if (closed && chain.triangles.size() != chain.crossings.size()) chain.closed = false;
        band.chains.push_back(std::move(chain));
    };
    // Open chains start at hull crossing edges.
    for (std::uint32_t i = 0; i < band.crossing.size(); ++i) {
        const Edge& ed = topo.edges[band.crossing[i].edge];
        if (!visited[i] && ed.is_hull()) walk(i, ed.tri[0], false);
    }
    for (std::uint32_t i = 0; i < band.crossing.size(); ++i)
        if (!visited[i]) walk(i, topo.edges[band.crossing[i].edge].tri[0], true);
}

}  // namespace

std::size_t BoundaryBand::polyline_size() const {
    return static_cast<std::size_t>(
        std::count_if(crossing.begin(), crossing.end(), [](const CrossingEdge& c) { return c.resolved; }));
}

const char* to_string(DefectKind kind) {
    switch (kind) {
        case DefectKind::kPentagon: return "pentagon";
        case DefectKind::kHexagon: return "hexagon";
        case DefectKind::kMisaligned: return "misaligned";
        case DefectKind::kUnresolvable: return "unresolvable";
    }
    return "unknown";
}

BoundaryBand classify(const DelaunayMesh& mesh, const VoronoiMesh& voronoi, const ImplicitDomain& domain,
                      const SizingField& sizing, const SolverConfig& cfg) {
    const MeshTopology& topo = mesh.topology();
    BoundaryBand band;
    band.generation = mesh.generation();
    band.sign.resize(mesh.num_vertices());
    for (VertexId v = 0; v < mesh.num_vertices(); ++v)
        band.sign[v] = domain.eval_u(mesh.point(v)) <= -kSignEpsilon ? -1 : 1;

    band.crossing_of_edge.assign(topo.edges.size(), kNoIndex);
    std::vector<bool> near(mesh.num_vertices(), false);
    for (std::uint32_t e = 0; e < topo.edges.size(); ++e) {
        const Edge& ed = topo.edges[e];
        if (band.sign[ed.v[0]] == band.sign[ed.v[1]]) continue;
        CrossingEdge ce;
        ce.edge = e;
        near[ed.v[0]] = near[ed.v[1]] = true;
        if (voronoi.edge_of_dual[e] != VoronoiMesh::kNoEdge) {
            ce.voronoi_edge = voronoi.edge_of_dual[e];
            const VoronoiEdge& ve = voronoi.edges[ce.voronoi_edge];
            const Point2 c = midpoint(voronoi.vertices[ve.vertices[0]], voronoi.vertices[ve.vertices[1]]);
            ce.stable = voronoi.edge_length(ce.voronoi_edge) >= cfg.stable_factor * sizing(c);
            try {
                ce.touching = domain.project_to_boundary(c);
                ce.normal = touching_normal(domain, c, ce.touching);
                ce.resolved = true;
            } catch (const VanishingGradientError&) {
            } catch (const ProjectionError&) {
            }
        }
        band.crossing_of_edge[e] = static_cast<std::uint32_t>(band.crossing.size());
        band.crossing.push_back(ce);
    }
    for (VertexId v = 0; v < mesh.num_vertices(); ++v)
        if (near[v]) band.near_boundary_vertices.push_back(v);

    for (TriangleId t = 0; t < topo.triangles.size(); ++t) {
        const Point2 c = voronoi.vertices[t];
        if (std::abs(domain.eval_u(c)) < cfg.band_factor * sizing(c)) band.band_triangles.push_back(t);
    }
    build_chains(topo, band);
    return band;
}

double normal_deviation_deg(const BoundaryBand& band, const DelaunayMesh& mesh, std::uint32_t crossing_index) {
    const CrossingEdge& ce = band.crossing[crossing_index];
    const Edge& ed = mesh.topology().edges[ce.edge];
    const Vec2 d = mesh.point(ed.v[1]) - mesh.point(ed.v[0]);
    const double c = std::clamp(std::abs(dot(d, ce.normal)) / norm(d), 0.0, 1.0);
    return std::acos(c) * 180.0 / std::numbers::pi;
}

std::vector<BandPolygon> band_polygons(const BoundaryBand& band, const DelaunayMesh& mesh,
                                       const ImplicitDomain& domain, const SizingField& sizing) {
    const MeshTopology& topo = mesh.topology();
    std::vector<BandPolygon> out;
    for (const BandChain& chain : band.chains) {
        std::vector<std::size_t> stable_pos;
        for (std::size_t k = 0; k < chain.crossings.size(); ++k)
            if (band.crossing[chain.crossings[k]].stable) stable_pos.push_back(k);
        if (stable_pos.empty()) continue;
        const std::size_t n = chain.crossings.size();
        const std::size_t groups = chain.closed ? stable_pos.size() : stable_pos.size() - 1;
        for (std::size_t g = 0; g < groups; ++g) {
            const std::size_t from = stable_pos[g];
            std::size_t to = stable_pos[(g + 1) % stable_pos.size()];
            if (to <= from) to += n;  // wraps around a closed chain
            BandPolygon poly;
            poly.first = chain.crossings[from];
            poly.last = chain.crossings[to % n];
            for (std::size_t k = from; k < to; ++k) poly.triangles.push_back(chain.triangles[k % n]);
            for (std::size_t k = from; k <= to; ++k) {
                const Edge& ed = topo.edges[band.crossing[chain.crossings[k % n]].edge];
                const bool first_negative = band.sign[ed.v[0]] < 0;
                const VertexId neg = first_negative ? ed.v[0] : ed.v[1];
                const VertexId pos = first_negative ? ed.v[1] : ed.v[0];
                if (poly.negative_chain.empty() || poly.negative_chain.back() != neg) poly.negative_chain.push_back(neg);
                if (poly.positive_chain.empty() || poly.positive_chain.back() != pos) poly.positive_chain.push_back(pos);
            }
            poly.sides = static_cast<int>(poly.triangles.size()) + 2;
            for (const CornerSummit& cs : domain.corners()) {
                const double reach = kCornerReach * sizing(cs.position);
                for (TriangleId t : poly.triangles) {
                    const Triangle& tri = topo.triangles[t];
                    const Point2 cc = (1.0 / 3.0) * (mesh.point(tri.v[0]) + mesh.point(tri.v[1]) + mesh.point(tri.v[2]));
                    if (distance(cc, cs.position) < reach) poly.at_corner = true;
                }
            }
            out.push_back(std::move(poly));
        }
    }
    return out;
}

namespace {

// Polyline arclength fractions of the interior vertices of `chain`.
std::vector<double> interior_fractions(const DelaunayMesh& mesh, const std::vector<VertexId>& chain) {
    std::vector<double> cum{0.0};
    for (std::size_t k = 1; k < chain.size(); ++k)
        cum.push_back(cum.back() + distance(mesh.point(chain[k - 1]), mesh.point(chain[k])));
    std::vector<double> out;
    for (std::size_t k = 1; k + 1 < chain.size(); ++k) out.push_back(cum[k] / cum.back());
    return out;
}

// Each interior vertex of one chain is mirrored onto the straight virtual side
// spanned by the ends of the opposite chain.
std::vector<Point2> mirror_points(const DelaunayMesh& mesh, const BandPolygon& poly) {
    std::vector<Point2> out;
    auto mirror = [&](const std::vector<VertexId>& from, const std::vector<VertexId>& onto) {
        const Point2 a = mesh.point(onto.front()), b = mesh.point(onto.back());
        for (double f : interior_fractions(mesh, from)) out.push_back(a + f * (b - a));
    };
    mirror(poly.negative_chain, poly.positive_chain);
    mirror(poly.positive_chain, poly.negative_chain);
    return out;
}

}  // namespace

std::vector<DefectPolygon> detect_defects(const BoundaryBand& band, const DelaunayMesh& mesh,
                                          const ImplicitDomain& domain, const SizingField& sizing,
                                          const SolverConfig& cfg) {
    std::vector<DefectPolygon> out;
    for (const BandPolygon& poly : band_polygons(band, mesh, domain, sizing)) {
        if (poly.at_corner || poly.sides <= 4) continue;
        DefectPolygon d;
        d.first = poly.first;
        d.last = poly.last;
        d.triangles = poly.triangles;
        d.sides = poly.sides;
        if (poly.sides > 6) {
            d.kind = DefectKind::kUnresolvable;
        } else {
            d.kind = poly.sides == 5 ? DefectKind::kPentagon : DefectKind::kHexagon;
            d.insertions = mirror_points(mesh, poly);
        }
        out.push_back(std::move(d));
    }
    const MeshTopology& topo = mesh.topology();
    for (std::uint32_t i = 0; i < band.crossing.size(); ++i) {
        const CrossingEdge& ce = band.crossing[i];
        if (!ce.resolved || !ce.stable || normal_deviation_deg(band, mesh, i) <= cfg.angle_tol_deg) continue;
        bool near_corner = false;
        for (const CornerSummit& cs : domain.corners())
            if (distance(ce.touching, cs.position) < kCornerReach * sizing(cs.position)) near_corner = true;
        if (near_corner) continue;
        DefectPolygon d;
        d.kind = DefectKind::kMisaligned;
        d.first = d.last = i;
        const Edge& ed = topo.edges[ce.edge];
        for (TriangleId t : ed.tri)
            if (t != kNoTriangle) d.triangles.push_back(t);
        d.sides = 4;
        out.push_back(std::move(d));
    }
    return out;
}

RefineResult refine(DelaunayMesh& mesh, const std::vector<DefectPolygon>& defects) {
    RefineResult result;
    for (const DefectPolygon& d : defects) {
        for (const Point2& p : d.insertions) {
            try {
                result.inserted.push_back(mesh.insert_vertex(p));
            } catch (const DuplicateVertexError& e) {
                result.skipped.push_back(std::string("duplicate of vertex ") + std::to_string(e.existing()));
            } catch (const OutsideHullError& e) {
                result.skipped.push_back(e.what());
            } catch (const InputError& e) {
                result.skipped.push_back(e.what());
            }
        }
    }
    return result;
}

}  // namespace voromesh
