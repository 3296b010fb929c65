#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "voromesh/errors.hpp"
#include "voromesh/repair/topology_repair.hpp"
#include "voromesh/solver/solver.hpp"

#include "band_fixtures.hpp"

using namespace voromesh;
using namespace fixture;

namespace {

struct Classified {
    DelaunayMesh mesh;
    VoronoiMesh voronoi;
    BoundaryBand band;
};

Classified classify_points(const std::vector<Point2>& pts, const ImplicitDomain& domain, const SizingField& h,
                           const SolverConfig& cfg = {}) {
    Classified c;
    c.mesh = DelaunayMesh::build(pts);
    c.voronoi = extract_voronoi(c.mesh);
    c.band = classify(c.mesh, c.voronoi, domain, h, cfg);
    return c;
}

std::size_t count_kind(const std::vector<DefectPolygon>& d, DefectKind k) {
    return static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [&](const DefectPolygon& x) { return x.kind == k; }));
}

// Sum of signed exterior angles of the closed polyline through the chain's Voronoi vertices.
double total_turning(const BandChain& chain, const VoronoiMesh& vor) {
    std::vector<Point2> poly;
    for (TriangleId t : chain.triangles) {
        const Point2 p = vor.vertices[t];
        if (poly.empty() || distance(poly.back(), p) > 1e-12) poly.push_back(p);
    }
    if (poly.size() > 1 && distance(poly.front(), poly.back()) <= 1e-12) poly.pop_back();
    double turn = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Vec2 a = poly[(k + 1) % poly.size()] - poly[k];
        const Vec2 b = poly[(k + 2) % poly.size()] - poly[(k + 1) % poly.size()];
        turn += std::atan2(cross(a, b), dot(a, b));
    }
    return turn;
}

}  // namespace

TEST_CASE("classify") {
    const SizingField h = SizingField::constant(1.0);
    SUBCASE("all vertices on one side") {
        const ImplicitDomain far(CsgNode::half_plane({0, -10}, {0, 1}), kStripBox);
        const Classified c = classify_points(Strip().points, far, h);
        CHECK(c.band.crossing.empty());
        CHECK(c.band.polyline_size() == 0);
        CHECK(c.band.chains.empty());
        CHECK(std::all_of(c.band.sign.begin(), c.band.sign.end(), [](auto s) { return s == 1; }));
    }
    SUBCASE("single crossing edge") {
        // u = y + 0.1
        const ImplicitDomain dom(CsgNode::half_plane({0, -0.1}, {0, 1}), {{-2, -2}, {2, 2}});
        const std::vector<Point2> pts{{0, -0.2}, {0, 0.1}, {1.5, -1.5}, {-1.5, -1.4}};
        const Classified c = classify_points(pts, dom, h);
        REQUIRE(dom.eval_u(pts[0]) == doctest::Approx(-0.1));
        REQUIRE(dom.eval_u(pts[1]) == doctest::Approx(0.2));
        const auto& topo = c.mesh.topology();
        bool found = false;
        for (const CrossingEdge& ce : c.band.crossing) {
            const Edge& ed = topo.edges[ce.edge];
            if ((ed.v[0] == 0 && ed.v[1] == 1) || (ed.v[0] == 1 && ed.v[1] == 0)) {
                found = true;
                CHECK(ce.voronoi_edge != kNoIndex);
                CHECK(ce.resolved);
            }
        }
        CHECK(found);
    }
    SUBCASE("zero level counts as positive") {
        const Classified c = classify_points(Strip().points, ImplicitDomain(CsgNode::half_plane({0, 0.5}, {0, 1}), kStripBox), h);
        CHECK(c.band.sign[Strip().index(3, 3)] == 1);
        CHECK(c.band.sign[Strip().index(3, 2)] == -1);
    }
    SUBCASE("invariants and idempotence on a circle") {
        const ImplicitDomain circle(CsgNode::circle({0.02, -0.03}, 1.0), {{-2, -2}, {2, 2}});
        std::vector<Point2> pts;
        for (int j = 0; j <= 26; ++j)
            for (int i = 0; i <= 26; ++i) pts.push_back({-2 + i * 4.0 / 26, -2 + j * 4.0 / 26});
        const SizingField hs = SizingField::constant(4.0 / 26);
        const Classified c = classify_points(pts, circle, hs);
        const auto& topo = c.mesh.topology();
        REQUIRE(!c.band.crossing.empty());
        for (const CrossingEdge& ce : c.band.crossing) {
            const Edge& ed = topo.edges[ce.edge];
            CHECK(c.band.sign[ed.v[0]] * c.band.sign[ed.v[1]] == -1);
            CHECK(c.band.crossing_of_edge[ce.edge] == static_cast<std::uint32_t>(&ce - c.band.crossing.data()));
            if (ce.resolved) {
                CHECK(std::abs(circle.eval_u(ce.touching)) <= circle.projection_tolerance());
                CHECK(norm(ce.normal) == doctest::Approx(1.0));
            }
        }
        REQUIRE(c.band.chains.size() == 1);
        CHECK(c.band.chains[0].closed);
        CHECK(std::abs(std::abs(total_turning(c.band.chains[0], c.voronoi)) - 2 * std::numbers::pi) < 1e-9);

        const BoundaryBand again = classify(c.mesh, c.voronoi, circle, hs, SolverConfig{});
        REQUIRE(again.crossing.size() == c.band.crossing.size());
        for (std::size_t k = 0; k < again.crossing.size(); ++k) {
            CHECK(again.crossing[k].edge == c.band.crossing[k].edge);
            CHECK(again.crossing[k].touching == c.band.crossing[k].touching);
            CHECK(again.crossing[k].normal == c.band.crossing[k].normal);
            CHECK(again.crossing[k].stable == c.band.crossing[k].stable);
        }
        CHECK(again.band_triangles == c.band.band_triangles);
        CHECK(again.near_boundary_vertices == c.band.near_boundary_vertices);
    }
}

TEST_CASE("band polygons") {
    const SizingField h = SizingField::constant(1.0);
    const ImplicitDomain dom = interface_domain();
    SUBCASE("orthogonal quad band has no defects") {
        const Classified c = classify_points(Strip().points, dom, h);
        const auto polys = band_polygons(c.band, c.mesh, dom, h);
        CHECK(polys.size() == 6);  // the two hull verticals have no dual
        for (const BandPolygon& p : polys) {
            CHECK(p.sides == 4);
            CHECK(p.negative_chain.size() == 2);
            CHECK(p.positive_chain.size() == 2);
        }
        CHECK(detect_defects(c.band, c.mesh, dom, h, SolverConfig{}).empty());
        for (std::uint32_t i = 0; i < c.band.crossing.size(); ++i)
            if (c.band.crossing[i].stable) CHECK(normal_deviation_deg(c.band, c.mesh, i) == doctest::Approx(0.0));
    }
    SUBCASE("sheared stable edge is misaligned") {
        Strip s;
        // Shift the whole upper half so the vertical edges lean by atan(0.6) ~ 31 degrees.
        for (std::size_t k = 0; k < s.points.size(); ++k)
            if (s.points[k].y > 0) s.points[k].x += 0.6;
        const Classified c = classify_points(s.points, dom, h);
        const auto defects = detect_defects(c.band, c.mesh, dom, h, SolverConfig{});
        CHECK(count_kind(defects, DefectKind::kMisaligned) > 0);
        for (const DefectPolygon& d : defects)
            if (d.kind == DefectKind::kMisaligned) CHECK(d.insertions.empty());
    }
}

TEST_CASE("pentagon and hexagon defects") {
    const SizingField h = SizingField::constant(1.0);
    const ImplicitDomain dom = interface_domain();
    SolverConfig cfg;

    SUBCASE("pentagon gets one insertion") {
        Strip s = pentagon_strip();
        const Classified c = classify_points(s.points, dom, h, cfg);
        const auto defects = detect_defects(c.band, c.mesh, dom, h, cfg);
        REQUIRE(defects.size() == 1);
        const DefectPolygon& d = defects[0];
        CHECK(d.kind == DefectKind::kPentagon);
        CHECK(d.sides == 5);
        REQUIRE(d.insertions.size() == 1);
        CHECK(d.insertions[0].x == doctest::Approx(3.0));
        CHECK(d.insertions[0].y == doctest::Approx(0.5));
        CHECK(std::abs(dom.eval_u(d.insertions[0])) < cfg.band_factor * h(d.insertions[0]));
    }
    SUBCASE("hexagon gets two insertions") {
        Strip s = hexagon_strip();
        const Classified c = classify_points(s.points, dom, h, cfg);
        const auto defects = detect_defects(c.band, c.mesh, dom, h, cfg);
        REQUIRE(defects.size() == 1);
        CHECK(defects[0].kind == DefectKind::kHexagon);
        CHECK(defects[0].sides == 6);
        REQUIRE(defects[0].insertions.size() == 2);
        for (const Point2& p : defects[0].insertions) {
            CHECK(p.y == doctest::Approx(0.5));
            CHECK(p.x > 2.0);
            CHECK(p.x < 4.0);
        }
    }
    SUBCASE("polygons with more than six sides are unresolvable") {
        // Hexagon plus one unmatched vertex above.
        Strip s = hexagon_strip();
        s.add(on_band_circle(90));
        const Classified c = classify_points(s.points, dom, h, cfg);
        const auto defects = detect_defects(c.band, c.mesh, dom, h, cfg);
        REQUIRE(defects.size() == 1);
        CHECK(defects[0].kind == DefectKind::kUnresolvable);
        CHECK(defects[0].sides == 7);
        CHECK(defects[0].insertions.empty());
    }
}

TEST_CASE("refine") {
    const SizingField h = SizingField::constant(1.0);
    const ImplicitDomain dom = interface_domain();
    SolverConfig cfg;

    SUBCASE("empty defect list") {
        DelaunayMesh mesh = DelaunayMesh::build(Strip().points);
        const auto before = mesh.points();
        const RefineResult r = refine(mesh, {});
        CHECK(r.inserted.empty());
        CHECK(r.skipped.empty());
        CHECK(mesh.points() == before);
    }
    SUBCASE("rejected points become diagnostics") {
        DelaunayMesh mesh = DelaunayMesh::build(Strip().points);
        DefectPolygon d;
        d.insertions = {{3.0, 0.5}, {50.0, 0.0}, {3.5, 0.0}};
        const RefineResult r = refine(mesh, {d});
        CHECK(r.inserted.size() == 1);
        CHECK(r.skipped.size() == 2);
        CHECK(mesh.num_vertices() == Strip().points.size() + 1);
    }
    for (const bool hexagon : {false, true}) {
        CAPTURE(hexagon);
        SUBCASE("insertion and relaxation resolve the defect") {
            Strip s = hexagon ? hexagon_strip() : pentagon_strip();
            Classified c = classify_points(s.points, dom, h, cfg);
            const auto defects = detect_defects(c.band, c.mesh, dom, h, cfg);
            REQUIRE(defects.size() == 1);
            const std::size_t n0 = c.mesh.num_vertices();
            const RefineResult r = refine(c.mesh, defects);
            CHECK(r.inserted.size() == (hexagon ? 2u : 1u));
            CHECK(c.mesh.num_vertices() == n0 + r.inserted.size());

            std::vector<bool> fixed = s.fixed;
            fixed.resize(c.mesh.num_vertices(), false);
            SolverConfig solve = cfg;
            solve.max_iterations = 300;
            const RunResult res = run(c.mesh.points(), fixed, dom, h, solve);
            CHECK(res.refinement_rounds == 0);
            CHECK(res.remaining_defects == 0);
            CHECK(detect_defects(res.state.band, res.state.mesh, dom, h, cfg).empty());
        }
    }
}
