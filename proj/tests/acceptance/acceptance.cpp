// Acceptance gate: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "band_fixtures.hpp"
#include "gradient_checks.hpp"
#include "oracles.hpp"
#include "voromesh/geometry/delaunay.hpp"
#include "voromesh/geometry/voronoi.hpp"
#include "voromesh/io/job.hpp"
#include "voromesh/io/lattice.hpp"
#include "voromesh/io/run_spec.hpp"
#include "voromesh/post/postprocess.hpp"
#include "voromesh/solver/solver.hpp"

using namespace voromesh;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string spec_path(const char* name) { return std::string(VOROMESH_SPEC_DIR) + "/" + name; }

RunSpec load_spec(const char* name) { return parse_spec(read_file(spec_path(name))); }

int run_cli(const std::string& args) {
    const std::string cmd = std::string("'") + VOROMESH_CLI + "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("voromesh_accept_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// The random corpus shared by criteria 1 and 2: sizes 16..64, seeds 1..100.
std::vector<std::vector<Point2>> corpus() {
    std::vector<std::vector<Point2>> sets;
    for (std::uint32_t k = 0; k < 100; ++k) sets.push_back(oracle::random_points(16 + k % 49, 1000 + k));
    return sets;
}

struct Pipeline {
    RunSpec spec;
    ImplicitDomain domain;
    RunResult result;
    HybridMesh raw;     // delta = 0
    HybridMesh hybrid;  // spec delta
    QualityReport quality;

    explicit Pipeline(const char* name)
        : spec(load_spec(name)), domain(spec.domain, spec.frame.box) {
        const Lattice l = init_lattice(spec.frame.box, spec.frame.spacing, spec.seed, spec.jitter);
        result = run(l.points, l.fixed, domain, spec.sizing, spec.solver);
        const IterationState& s = result.state;
        CollapseOptions none = spec.collapse;
        none.delta = 0.0;
        raw = collapse_short_edges(s.voronoi, s.mesh, s.band, spec.sizing, none);
        hybrid = collapse_short_edges(s.voronoi, s.mesh, s.band, spec.sizing, spec.collapse);
        quality = quality_report(hybrid, s.band, s.mesh, domain, spec.sizing, spec.collapse.delta);
    }
};

// Convex hull by monotone chain, counterclockwise.
std::vector<Point2> hull(std::vector<Point2> p) {
    std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) return p;
    std::vector<Point2> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && oracle::orient_exact(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && oracle::orient_exact(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    h.resize(k - 1);
    return h;
}

double area(const std::vector<Point2>& poly) {
    double a = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) a += cross(poly[k], poly[(k + 1) % poly.size()]);
    return 0.5 * a;
}

bool left_turns_only(const std::vector<Point2>& poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t k = 0; k < n; ++k) {
        const Point2 a = poly[k], b = poly[(k + 1) % n], c = poly[(k + 2) % n];
        if (cross(b - a, c - b) < -1e-9 * norm(b - a) * norm(c - b)) return false;
    }
    return area(poly) > 0.0;
}

// ---------------------------------------------------------------------------

Outcome delaunay_oracle() {
    const auto t0 = Clock::now();
    std::size_t violations = 0, triangles = 0;
    for (const auto& pts : corpus()) {
        const DelaunayMesh mesh = DelaunayMesh::build(pts);
        triangles += mesh.topology().triangles.size();
        violations += oracle::empty_circle_violations(mesh.points(), mesh.topology().triangles);
    }
    const double secs = seconds_since(t0);
    return {violations == 0 && secs < 10.0,
            fmt("%zu triangles, %zu empty-circle violations, %.2f s (limit 10 s)", triangles, violations, secs)};
}

Outcome voronoi_duality() {
    double worst = 0.0;
    std::size_t probes = 0, inconsistent = 0;
    std::mt19937 rng(77);
    for (const auto& pts : corpus()) {
        const DelaunayMesh mesh = DelaunayMesh::build(pts);
        const VoronoiMesh vor = extract_voronoi(mesh);
        const MeshTopology& topo = mesh.topology();
        for (TriangleId t = 0; t < topo.triangles.size(); ++t) {
            const auto& v = topo.triangles[t].v;
            const Point2 c = vor.vertices[t];
            const double d0 = distance(c, pts[v[0]]), d1 = distance(c, pts[v[1]]), d2 = distance(c, pts[v[2]]);
            const double mean = (d0 + d1 + d2) / 3.0;
            worst = std::max(worst, (std::max({d0, d1, d2}) - std::min({d0, d1, d2})) / mean);
        }
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 100; ++k, ++probes) {
            const Point2 q{u(rng), u(rng)};
            const std::size_t g = oracle::nearest(pts, q);
            bool ok;
            if (!vor.infinite_cell[g]) {
                ok = oracle::in_convex_polygon(vor.cell_polygon(static_cast<VertexId>(g)), q, 1e-12);
            } else {
                // Unbounded cell: q is on g's side of every bisector with a Delaunay neighbour.
                ok = true;
                for (std::uint32_t e : topo.star_edges(static_cast<VertexId>(g))) {
                    const Point2 n = pts[topo.edges[e].other(static_cast<VertexId>(g))];
                    if (distance(q, pts[g]) > distance(q, n) + 1e-12) ok = false;
                }
            }
            if (!ok) ++inconsistent;
        }
    }
    return {worst <= 1e-10 && inconsistent == 0,
            fmt("max equidistance rel. err %.2e (limit 1e-10), %zu/%zu probes inconsistent", worst, inconsistent,
                probes)};
}

Outcome gradient_suite() {
    const auto t0 = Clock::now();
    const double a = gradcheck::repulsion_check(101, 1000);
    const double b = gradcheck::jacobian_check(102, 5000);
    const double bt = gradcheck::translation_identity_check(103, 5000);
    const double c = gradcheck::sharpening_check(104, 1000);
    const double d = gradcheck::attraction_check(105, 1000);
    const double secs = seconds_since(t0);
    return {a < 1e-6 && b < 1e-8 && bt < 1e-10 && c < 1e-5 && d < 1e-5 && secs < 30.0,
            fmt("(a) %.1e (b) %.1e, identity %.1e (c) %.1e (d) %.1e, %.2f s", a, b, bt, c, d, secs)};
}

Outcome circle_benchmark() {
    const auto t0 = Clock::now();
    const Pipeline p("circle.json");
    const double secs = seconds_since(t0);
    const QualityReport& q = p.quality;
    const IterationState& s = p.result.state;
    std::size_t non_quad = 0;
    for (const BandPolygon& bp : band_polygons(s.band, s.mesh, p.domain, p.spec.sizing))
        if (bp.sides != 4) ++non_quad;
    const double aligned = q.stable_crossing_edges ? double(q.aligned_within_10deg) / q.stable_crossing_edges : 0.0;
    const bool pass = p.result.converged && p.result.iterations <= 2000 && q.midpoint_distance_max < 0.1 &&
                      aligned >= 0.95 && p.result.remaining_defects == 0 && non_quad == 0 && secs < 120.0;
    return {pass, fmt("converged=%d in %d iterations, midpoint distance %.4f h (limit 0.1), stable edges within "
                      "10 deg %zu/%zu (all resolved crossing edges %zu/%zu), defects %zu, non-quad band polygons "
                      "%zu, %.2f s",
                      int(p.result.converged), p.result.iterations, q.midpoint_distance_max,
                      q.aligned_within_10deg, q.stable_crossing_edges, q.crossing_aligned_within_10deg,
                      q.crossing_edges, p.result.remaining_defects, non_quad, secs)};
}

Outcome sharp_corner() {
    const Pipeline p("square.json");
    const IterationState& s = p.result.state;
    const auto polygons = band_polygons(s.band, s.mesh, p.domain, p.spec.sizing);
    const MeshTopology& topo = s.mesh.topology();
    bool pass = p.domain.corners().size() == 4 && p.quality.corners.size() == 4;
    std::string detail = fmt("converged=%d;", int(p.result.converged));
    for (const CornerDistance& c : p.quality.corners) {
        // The corner cell: the corner band polygon whose dual vertices come closest to the summit.
        const BandPolygon* best = nullptr;
        double best_d = 1e300;
        for (const BandPolygon& bp : polygons) {
            if (!bp.at_corner) continue;
            for (TriangleId t : bp.triangles) {
                const double d = distance(s.voronoi.vertices[t], c.summit);
                if (d < best_d) {
                    best_d = d;
                    best = &bp;
                }
            }
        }
        std::size_t fan = 0;
        bool convex = false;
        if (best) {
            fan = best->triangles.size();
            std::vector<Point2> verts;
            double union_area = 0.0;
            for (TriangleId t : best->triangles) {
                std::vector<Point2> tri;
                for (VertexId v : topo.triangles[t].v) tri.push_back(s.mesh.point(v)), verts.push_back(s.mesh.point(v));
                union_area += area(tri);
            }
            const std::vector<Point2> h = hull(verts);
            // The triangles do not overlap, so their union is convex iff it fills its hull.
            convex = std::abs(area(h) - union_area) <= 1e-9 * area(h);
        }
        const bool ok = c.distance < 0.2 && convex && fan > 4;
        pass = pass && ok;
        detail += fmt(" (%.2f,%.2f): nearest vertex %.3f h, corner cell %zu fan triangles %s;", c.summit.x,
                      c.summit.y, c.distance, fan, convex ? "convex" : "NOT convex");
    }
    detail += " required: < 0.2 h, convex, > 4 fan triangles";
    return {pass, detail};
}

Outcome refinement_rules() {
    using namespace fixture;
    const SizingField h = SizingField::constant(1.0);
    const ImplicitDomain dom = interface_domain();
    const SolverConfig cfg;
    bool pass = true;
    std::string detail;
    for (const bool hexagon : {false, true}) {
        const Strip s = hexagon ? hexagon_strip() : pentagon_strip();
        DelaunayMesh mesh = DelaunayMesh::build(s.points);
        const VoronoiMesh vor = extract_voronoi(mesh);
        const BoundaryBand band = classify(mesh, vor, dom, h, cfg);
        const auto defects = detect_defects(band, mesh, dom, h, cfg);
        const DefectKind want = hexagon ? DefectKind::kHexagon : DefectKind::kPentagon;
        const std::size_t insertions = defects.size() == 1 ? defects[0].insertions.size() : 0;
        const bool detected = defects.size() == 1 && defects[0].kind == want;
        const RefineResult r = refine(mesh, defects);
        std::vector<bool> fixed = s.fixed;
        fixed.resize(mesh.num_vertices(), false);
        SolverConfig solve = cfg;
        solve.max_iterations = 300;
        const RunResult res = run(mesh.points(), fixed, dom, h, solve);
        const std::size_t after = detect_defects(res.state.band, res.state.mesh, dom, h, cfg).size();
        const std::size_t expected = hexagon ? 2 : 1;
        const bool ok = detected && insertions == expected && r.inserted.size() == expected && after == 0;
        pass = pass && ok;
        detail += fmt("%s: %zu defect(s) detected, %zu insertions (want %zu), %zu defects after solve; ",
                      hexagon ? "hexagon" : "pentagon", defects.size(), insertions, expected, after);
    }
    return {pass, detail};
}

Outcome collapse_safety() {
    const Pipeline p("circle.json");
    const IterationState& s = p.result.state;
    const QualityReport before = quality_report(p.raw, s.band, s.mesh, p.domain, p.spec.sizing);
    const QualityReport& after = p.quality;
    const double dv = std::abs(after.vertex_distance_max - before.vertex_distance_max);
    const double dm = std::abs(after.midpoint_distance_max - before.midpoint_distance_max);
    std::size_t nonconvex = 0;
    for (const HybridCell& c : p.hybrid.cells)
        if (!left_turns_only(cell_polygon(p.hybrid, c))) ++nonconvex;
    return {dv < 0.05 && dm < 0.05 && nonconvex == 0,
            fmt("vertex deviation %.4f -> %.4f h, midpoint deviation %.4f -> %.4f h (limit change 0.05), "
                "%zu merges, %zu/%zu cells non-convex",
                before.vertex_distance_max, after.vertex_distance_max, before.midpoint_distance_max,
                after.midpoint_distance_max, p.hybrid.collapse.merged, nonconvex, p.hybrid.cells.size())};
}

Outcome wheel_end_to_end() {
    const TempDir tmp("wheel");
    const RunSpec spec = load_spec("wheel.json");
    const auto t0 = Clock::now();
    const int code = run_cli("mesh '" + spec_path("wheel.json") + "' --out '" + tmp.path.string() + "' --quiet");
    const double secs = seconds_since(t0);
    if (!fs::exists(tmp.path / "report.json")) return {false, fmt("exit %d, no report", code)};

    const auto report = nlohmann::json::parse(read_file(tmp.path / "report.json"));
    const std::size_t vertices = report["vertices"].get<std::size_t>();
    std::vector<std::size_t> rounds;
    struct Snap {
        int iteration;
        std::size_t defects;
        double deviation;
        double aligned;
        std::string file;
    };
    std::vector<Snap> snaps;
    std::istringstream events(read_file(tmp.path / "events.jsonl"));
    for (std::string line; std::getline(events, line);) {
        const auto e = nlohmann::json::parse(line);
        if (e["event"] == "refinement") rounds.push_back(e["defects_before"].get<std::size_t>());
        if (e["event"] == "snapshot") {
            const double stable = e["stable_edges"].get<double>();
            snaps.push_back({e["iteration"].get<int>(), e["defects"].get<std::size_t>(),
                             e["polyline_distance_max"].is_null() ? 1e300 : e["polyline_distance_max"].get<double>(),
                             stable > 0 ? e["stable_within_10deg"].get<double>() / stable : 0.0,
                             e["file"].get<std::string>()});
        }
    }
    const std::size_t final_defects = report["remaining_defects"].get<std::size_t>();
    bool monotone = true;
    for (std::size_t k = 1; k < rounds.size(); ++k) monotone = monotone && rounds[k] <= rounds[k - 1];
    std::string seq;
    for (std::size_t d : rounds) seq += std::to_string(d) + " ";
    seq += "-> " + std::to_string(final_defects);

    // Progression: the lattice staircase, then a polyline closer to Gamma with better aligned stable edges.
    bool snapshots_ok = snaps.size() == spec.snapshots.size();
    for (const Snap& s : snaps) {
        const std::string svg = read_file(tmp.path / s.file);
        snapshots_ok = snapshots_ok && svg.find("id=\"polyline\"") != std::string::npos;
    }
    std::string prog;
    for (const Snap& s : snaps)
        prog += fmt("it %d: deviation %.3f h, aligned %.0f%%, defects %zu; ", s.iteration, s.deviation,
                    100 * s.aligned, s.defects);
    if (snaps.size() >= 2) {
        snapshots_ok = snapshots_ok && snaps.front().iteration == 0 && snaps.back().deviation < snaps.front().deviation &&
                       snaps.back().aligned > snaps.front().aligned;
    }
    const bool pass = code == 0 && vertices >= 5000 && vertices <= 15000 && secs < 300.0 && monotone &&
                      final_defects == 0 && snapshots_ok;
    return {pass, fmt("exit %d, %zu vertices, %.1f s (limit 300 s), defects per refinement round %s (%s), "
                      "snapshots %s",
                      code, vertices, secs, seq.c_str(), monotone ? "monotone" : "NOT monotone", prog.c_str())};
}

Outcome determinism() {
    bool pass = true;
    std::string detail;
    struct Case {
        const char* spec;
        std::uint64_t seed;
    };
    for (const Case c : {Case{"circle.json", 0}, Case{"square.json", 0}, Case{"circle.json", 42}}) {
        const TempDir tmp(std::string("det_") + c.spec + std::to_string(c.seed));
        RunSpec spec = load_spec(c.spec);
        spec.seed = c.seed;
        std::ofstream(tmp.path / "spec.json") << serialize_spec(spec);
        const std::string input = "'" + (tmp.path / "spec.json").string() + "'";
        const int a = run_cli("mesh " + input + " --out '" + (tmp.path / "a").string() + "' --quiet");
        const int b = run_cli("mesh " + input + " --out '" + (tmp.path / "b").string() + "' --quiet");
        std::size_t files = 0, differ = 0;
        for (const auto& e : fs::directory_iterator(tmp.path / "a")) {
            ++files;
            const fs::path other = tmp.path / "b" / e.path().filename();
            if (!fs::exists(other) || read_file(e.path()) != read_file(other)) ++differ;
        }
        const bool ok = a == b && (a == 0 || a == 2) && files >= 5 && differ == 0 &&
                        fs::exists(tmp.path / "a/mesh.txt") && fs::exists(tmp.path / "a/report.json");
        pass = pass && ok;
        detail += fmt("%s seed %llu: %zu files, %zu differ; ", c.spec, static_cast<unsigned long long>(c.seed),
                      files, differ);
    }
    return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"Delaunay oracle", delaunay_oracle},       {"Voronoi duality", voronoi_duality},
        {"Gradient suite", gradient_suite},         {"Circle benchmark", circle_benchmark},
        {"Sharp-corner benchmark", sharp_corner},   {"Refinement rules", refinement_rules},
        {"Collapse safety", collapse_safety},       {"Wheel model end-to-end", wheel_end_to_end},
        {"Determinism", determinism},
    };
    std::set<int> selected;
    for (int k = 1; k < argc; ++k) selected.insert(std::atoi(argv[k]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("[%s] criterion %d, %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
