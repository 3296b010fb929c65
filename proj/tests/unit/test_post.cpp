#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "voromesh/post/postprocess.hpp"
#include "voromesh/solver/solver.hpp"

using namespace voromesh;

namespace {

struct Lattice {
    std::vector<Point2> points;
    std::vector<bool> fixed;
};

Lattice frame_lattice(double lo, double hi, int n) {
    Lattice l;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            l.points.push_back({lo + (hi - lo) * i / (n - 1), lo + (hi - lo) * j / (n - 1)});
            l.fixed.push_back(i == 0 || j == 0 || i == n - 1 || j == n - 1);
        }
    return l;
}

// Independent convexity test: every consecutive triple turns left or goes straight.
bool left_turns_only(const std::vector<Point2>& poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    double area = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const Point2 a = poly[k], b = poly[(k + 1) % n], c = poly[(k + 2) % n];
        const double ab = norm(b - a), bc = norm(c - b);
        if (cross(b - a, c - b) < -1e-9 * ab * bc) return false;
        area += cross(a, b);
    }
    return area > 0.0;
}

using EdgeKey = std::pair<std::uint32_t, std::uint32_t>;
EdgeKey key(std::uint32_t a, std::uint32_t b) { return {std::min(a, b), std::max(a, b)}; }

std::set<EdgeKey> polyline_edges(const HybridMesh& h) {
    std::set<EdgeKey> out;
    for (const PolylineChain& c : h.boundary) {
        const std::size_t n = c.vertices.size();
        const std::size_t segs = c.closed ? n : n - 1;
        for (std::size_t k = 0; k < segs; ++k) out.insert(key(c.vertices[k], c.vertices[(k + 1) % n]));
    }
    return out;
}

// Edges shared by a cell of each subdomain.
std::set<EdgeKey> interface_edges(const HybridMesh& h) {
    std::map<EdgeKey, int> seen;  // bit 0: subdomain 0 cell, bit 1: subdomain 1 cell
    for (const HybridCell& c : h.cells)
        for (std::size_t k = 0; k < c.vertices.size(); ++k)
            seen[key(c.vertices[k], c.vertices[(k + 1) % c.vertices.size()])] |= 1 << c.subdomain;
    std::set<EdgeKey> out;
    for (const auto& [e, mask] : seen)
        if (mask == 3) out.insert(e);
    return out;
}

struct CircleRun {
    ImplicitDomain domain{CsgNode::circle({0, 0}, 1.0), {{-2, -2}, {2, 2}}};
    SizingField sizing = SizingField::constant(0.15);
    RunResult result;

    CircleRun() {
        const Lattice l = frame_lattice(-2, 2, 27);
        result = run(l.points, l.fixed, domain, sizing, SolverConfig{});
    }
};

const CircleRun& circle_run() {
    static const CircleRun r;
    return r;
}

}  // namespace

TEST_CASE("is_convex") {
    CHECK(is_convex({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
    CHECK(is_convex({{0, 0}, {1, 0}, {2, 0}, {2, 1}, {0, 1}}));  // straight angle
    CHECK(is_convex({{0, 0}, {1, 0}, {1, 0}, {1, 1}, {0, 1}}));  // repeated vertex
    CHECK_FALSE(is_convex({{0, 0}, {1, 0}, {0.5, 0.2}, {1, 1}, {0, 1}}));
    CHECK_FALSE(is_convex({{0, 0}, {0, 1}, {1, 1}, {1, 0}}));  // clockwise
    CHECK_FALSE(is_convex({{0, 0}, {1, 0}}));
}

TEST_CASE("collapse on a square lattice") {
    // Every lattice square is exactly cocircular, so its diagonal has a zero-length dual.
    const Lattice l = frame_lattice(0, 4, 5);
    const DelaunayMesh mesh = DelaunayMesh::build(l.points);
    const VoronoiMesh vor = extract_voronoi(mesh);
    const ImplicitDomain far(CsgNode::circle({40, 40}, 1), {{-1, -1}, {50, 50}});
    const SizingField h = SizingField::constant(1.0);
    const BoundaryBand band = classify(mesh, vor, far, h, SolverConfig{});

    std::set<std::pair<double, double>> centers;
    for (const Point2& p : vor.vertices) centers.insert({p.x, p.y});

    CollapseOptions opt;
    opt.delta = 0.0;
    const HybridMesh hm = collapse_short_edges(vor, mesh, band, h, opt);
    CHECK(hm.vertices.size() == centers.size());
    CHECK(hm.cells.size() == 9);  // interior generators
    for (const HybridCell& c : hm.cells) {
        CHECK(c.vertices.size() == 4);
        CHECK(left_turns_only(cell_polygon(hm, c)));
    }
    CHECK(hm.boundary.empty());
    const auto subs = extract_subdomains(hm, far);
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].cells.size() == hm.cells.size());
}

TEST_CASE("delta zero keeps the mesh") {
    const CircleRun& r = circle_run();
    const IterationState& s = r.result.state;
    CollapseOptions opt;
    opt.delta = 0.0;
    const HybridMesh hm = collapse_short_edges(s.voronoi, s.mesh, s.band, r.sizing, opt);
    std::size_t finite = 0;
    for (VertexId g = 0; g < s.mesh.num_vertices(); ++g) {
        if (s.voronoi.infinite_cell[g] || s.voronoi.cells[g].empty()) continue;
        ++finite;
    }
    REQUIRE(hm.cells.size() == finite);
    for (const HybridCell& c : hm.cells) {
        // Same polygon as the raw cell with exact repeats removed.
        std::vector<Point2> raw;
        for (TriangleId t : s.voronoi.cells[c.generator])
            if (raw.empty() || !(raw.back() == s.voronoi.vertices[t])) raw.push_back(s.voronoi.vertices[t]);
        while (raw.size() > 1 && raw.front() == raw.back()) raw.pop_back();
        CHECK(cell_polygon(hm, c) == raw);
    }
    CHECK(hm.collapse.merged <= hm.collapse.candidates);
}

TEST_CASE("circle benchmark postprocessing") {
    const CircleRun& r = circle_run();
    REQUIRE(r.result.converged);
    const IterationState& s = r.result.state;

    CollapseOptions raw_opt;
    raw_opt.delta = 0.0;
    const HybridMesh raw = collapse_short_edges(s.voronoi, s.mesh, s.band, r.sizing, raw_opt);
    const HybridMesh hm = collapse_short_edges(s.voronoi, s.mesh, s.band, r.sizing);

    SUBCASE("cells stay convex") {
        for (const HybridCell& c : hm.cells) CHECK(left_turns_only(cell_polygon(hm, c)));
    }
    SUBCASE("generator signs are unchanged") {
        for (const HybridCell& c : hm.cells) CHECK(c.subdomain == (r.domain.eval_u(c.site) < 0 ? 1 : 0));
    }
    SUBCASE("boundary deviation is preserved") {
        const QualityReport before = quality_report(raw, s.band, s.mesh, r.domain, r.sizing);
        const QualityReport after = quality_report(hm, s.band, s.mesh, r.domain, r.sizing);
        CHECK(std::abs(after.vertex_distance_max - before.vertex_distance_max) < 0.05);
        CHECK(std::abs(after.midpoint_distance_max - before.midpoint_distance_max) < 0.05);
        CHECK(after.short_edges <= before.short_edges);
    }
    SUBCASE("polyline is closed and separates the subdomains") {
        REQUIRE(hm.boundary.size() == 1);
        CHECK(hm.boundary[0].closed);
        std::map<std::uint32_t, int> degree;
        for (const auto& [a, b] : polyline_edges(hm)) {
            ++degree[a];
            ++degree[b];
        }
        for (const auto& [v, d] : degree) CHECK(d % 2 == 0);
        CHECK(polyline_edges(hm) == interface_edges(hm));

        const auto subs = extract_subdomains(hm, r.domain);
        REQUIRE(subs.size() == 2);
        CHECK(subs[0].tag == 0);
        CHECK(subs[1].tag == 1);
        CHECK(subs[0].cells.size() + subs[1].cells.size() == hm.cells.size());
    }
    SUBCASE("quality report") {
        const QualityReport q = quality_report(hm, s.band, s.mesh, r.domain, r.sizing);
        CHECK(q.midpoint_distance_max < 0.1);
        CHECK(q.vertex_distance_mean <= q.vertex_distance_max);
        CHECK(q.stable_crossing_edges > 0);
        CHECK(q.aligned_within_10deg >= 0.95 * static_cast<double>(q.stable_crossing_edges));
        std::size_t hist = 0;
        for (std::size_t c : q.angle_histogram) hist += c;
        CHECK(hist == q.stable_crossing_edges);
        CHECK(q.non_quad_band_polygons == 0);
        CHECK(q.cell_quality_min > 0.0);
        CHECK(q.cell_quality_min <= q.cell_quality_mean);
        CHECK(q.cell_quality_mean <= 1.0);
        CHECK(q.corners.empty());
    }
}

TEST_CASE("polyline on the boundary has zero deviation") {
    // Rows at y = +-0.5 around the interface y = 0: every polyline vertex is on Gamma.
    std::vector<Point2> pts;
    std::vector<bool> fixed;
    for (int j = 0; j < 6; ++j)
        for (int i = 0; i <= 8; ++i) {
            pts.push_back({double(i), j - 2.5});
            fixed.push_back(false);
        }
    const ImplicitDomain dom(CsgNode::half_plane({0, 0}, {0, 1}), {{-1, -3.5}, {9, 3.5}});
    const SizingField h = SizingField::constant(1.0);
    const DelaunayMesh mesh = DelaunayMesh::build(pts);
    const VoronoiMesh vor = extract_voronoi(mesh);
    const BoundaryBand band = classify(mesh, vor, dom, h, SolverConfig{});
    const HybridMesh hm = collapse_short_edges(vor, mesh, band, h);
    const QualityReport q = quality_report(hm, band, mesh, dom, h);
    CHECK(q.vertex_distance_max == 0.0);
    CHECK(q.midpoint_distance_max == 0.0);
    CHECK(q.aligned_within_10deg == q.stable_crossing_edges);
}

TEST_CASE("corner metric on a square") {
    std::vector<CsgNode> planes;
    for (Vec2 n : {Vec2{1, 0}, Vec2{0, 1}, Vec2{-1, 0}, Vec2{0, -1}}) planes.push_back(CsgNode::half_plane(0.93 * n, n));
    const ImplicitDomain dom(CsgNode::make_intersection(planes), {{-2, -2}, {2, 2}});
    const SizingField h = SizingField::constant(0.15);
    const Lattice l = frame_lattice(-2, 2, 27);
    const IterationState s = make_state(l.points, l.fixed, dom, h, SolverConfig{});
    const HybridMesh hm = collapse_short_edges(s.voronoi, s.mesh, s.band, h);
    const QualityReport q = quality_report(hm, s.band, s.mesh, dom, h);
    REQUIRE(q.corners.size() == 4);
    for (const CornerDistance& c : q.corners) {
        double best = 1e300;
        for (const PolylineChain& ch : hm.boundary)
            for (std::uint32_t v : ch.vertices) best = std::min(best, distance(hm.vertices[v], c.summit));
        CHECK(c.distance == doctest::Approx(best / 0.15));
    }
}

TEST_CASE("collapse rejects a negative threshold") {
    const Lattice l = frame_lattice(0, 4, 5);
    const DelaunayMesh mesh = DelaunayMesh::build(l.points);
    const VoronoiMesh vor = extract_voronoi(mesh);
    const ImplicitDomain far(CsgNode::circle({40, 40}, 1), {{-1, -1}, {50, 50}});
    const BoundaryBand band = classify(mesh, vor, far, SizingField::constant(1.0), SolverConfig{});
    CollapseOptions opt;
    opt.delta = -1.0;
    CHECK_THROWS(collapse_short_edges(vor, mesh, band, SizingField::constant(1.0), opt));
}
