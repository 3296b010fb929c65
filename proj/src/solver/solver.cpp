#include "voromesh/solver/solver.hpp"

#include <algorithm>
#include <cmath>

#include "voromesh/errors.hpp"
#include "voromesh/geometry/predicates.hpp"
#include "voromesh/solver/elastic.hpp"

namespace voromesh {

namespace {

std::vector<double> vertex_sizes(std::span<const Point2> pts, const SizingField& sizing) {
    std::vector<double> h(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) h[i] = sizing(pts[i]);
    return h;
}

double edge_target(const std::vector<double>& h, const Edge& ed, const SolverConfig& cfg) {
    return cfg.m_compress * 0.5 * (h[ed.v[0]] + h[ed.v[1]]);
}

// Jacobian of the circumcenter of t with respect to its vertex v.
Mat2 jacobian_wrt(std::span<const Point2> pts, const Triangle& t, VertexId v) {
    const int k = t.v[0] == v ? 0 : (t.v[1] == v ? 1 : 2);
    return circumcenter_jacobian(pts[t.v[k]], pts[t.v[(k + 1) % 3]], pts[t.v[(k + 2) % 3]]);
}

Point2 triangle_circumcenter(std::span<const Point2> pts, const Triangle& t) {
    return circumcenter(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]]);
}

// F_a at positions `pts` with the band's connectivity.
std::vector<Vec2> attraction_field(std::span<const Point2> pts, const MeshTopology& topo, const BoundaryBand& band,
                                   const std::vector<bool>& fixed, const std::vector<double>& h,
                                   const ImplicitDomain& domain, const SolverConfig& cfg) {
    std::vector<std::vector<AttractionTerm>> terms(pts.size());
    for (const CrossingEdge& ce : band.crossing) {
        if (!ce.resolved) continue;
        const Edge& ed = topo.edges[ce.edge];
        const Triangle& t0 = topo.triangles[ed.tri[0]];
        const Triangle& t1 = topo.triangles[ed.tri[1]];
        // Frozen connectivity: a triangle folded by the sub-steps has no meaningful circumcenter.
        if (orient2d(pts[t0.v[0]], pts[t0.v[1]], pts[t0.v[2]]) <= 0 ||
            orient2d(pts[t1.v[0]], pts[t1.v[1]], pts[t1.v[2]]) <= 0)
            continue;
        try {
            const Point2 c = midpoint(triangle_circumcenter(pts, t0), triangle_circumcenter(pts, t1));
            const double u = domain.eval_u(c);
            const Vec2 g = domain.eval_grad(c);
            const double L = distance(pts[ed.v[0]], pts[ed.v[1]]);
            const double L0 = edge_target(h, ed, cfg);
            for (VertexId v : ed.v) {
                if (fixed[v]) continue;
                terms[v].push_back({jacobian_wrt(pts, t0, v), jacobian_wrt(pts, t1, v), u, g, L, L0});
            }
        } catch (const DegeneracyError&) {
        } catch (const VanishingGradientError&) {
        }
    }
    std::vector<Vec2> F(pts.size());
    for (std::size_t v = 0; v < pts.size(); ++v)
        if (!terms[v].empty()) F[v] = attraction_force(terms[v], cfg.theta_a);
    return F;
}

// Largest last-step displacement over vertices not touching any defect.
double max_displacement_outside(const IterationState& state, const std::vector<DefectPolygon>& defects) {
    std::vector<bool> skip(state.mesh.num_vertices(), false);
    const MeshTopology& topo = state.mesh.topology();
    for (const DefectPolygon& d : defects)
        for (TriangleId t : d.triangles)
            for (VertexId v : topo.triangles[t].v) skip[v] = true;
    double worst = 0.0;
    for (std::size_t v = 0; v < state.last_displacement.size(); ++v)
        if (!skip[v]) worst = std::max(worst, state.last_displacement[v]);
    return worst;
}

Point2 clamp_to(const BoundingBox& box, Point2 p) {
    const double eps = 1e-9 * box.diagonal();
    return {std::clamp(p.x, box.min.x + eps, box.max.x - eps), std::clamp(p.y, box.min.y + eps, box.max.y - eps)};
}

}  // namespace

IterationState make_state(std::vector<Point2> points, std::vector<bool> fixed, const ImplicitDomain& domain,
                          const SizingField& sizing, const SolverConfig& cfg) {
    if (fixed.size() != points.size()) throw InputError("make_state: fixed flags must match the point count");
    IterationState s;
    s.mesh = DelaunayMesh::build(points);
    s.fixed = std::move(fixed);
    bool any = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!s.fixed[i]) continue;
        if (!any) s.frame = {points[i], points[i]};
        any = true;
        s.frame.min = {std::min(s.frame.min.x, points[i].x), std::min(s.frame.min.y, points[i].y)};
        s.frame.max = {std::max(s.frame.max.x, points[i].x), std::max(s.frame.max.y, points[i].y)};
    }
    s.has_frame = any && s.frame.min.x < s.frame.max.x && s.frame.min.y < s.frame.max.y;
    refresh(s, domain, sizing, cfg);
    return s;
}

void refresh(IterationState& state, const ImplicitDomain& domain, const SizingField& sizing,
             const SolverConfig& cfg) {
    state.fixed.resize(state.mesh.num_vertices(), false);
    state.voronoi = extract_voronoi(state.mesh);
    state.band = classify(state.mesh, state.voronoi, domain, sizing, cfg);
    const std::size_t n = state.mesh.num_vertices();
    state.F_r.assign(n, {});
    state.F_s.assign(n, {});
    state.F_a.assign(n, {});
}

EnergyTerms total_energy(const IterationState& state, const ImplicitDomain& domain, const SizingField& sizing,
                         const SolverConfig& cfg) {
    const MeshTopology& topo = state.mesh.topology();
    const auto& pts = state.mesh.points();
    const std::vector<double> h = vertex_sizes(pts, sizing);
    EnergyTerms w;
    for (const Edge& ed : topo.edges)
        w.repulsion += repulsion_energy_edge(distance(pts[ed.v[0]], pts[ed.v[1]]), edge_target(h, ed, cfg));
    for (const CrossingEdge& ce : state.band.crossing) {
        if (!ce.resolved) continue;
        const Edge& ed = topo.edges[ce.edge];
        const Point2 c1 = state.voronoi.vertices[ed.tri[0]];
        const Point2 c2 = state.voronoi.vertices[ed.tri[1]];
        w.sharpening += sharpening_energy_edge(c1, c2, ce.normal);
        const Point2 c = midpoint(c1, c2);
        w.attraction += attraction_energy_edge(c, distance(pts[ed.v[0]], pts[ed.v[1]]), edge_target(h, ed, cfg),
                                               domain.eval_u(c));
    }
    w.repulsion *= cfg.theta_r;
    w.sharpening *= cfg.theta_s;
    w.attraction *= cfg.theta_a;
    w.total = w.repulsion + w.sharpening + w.attraction;
    return w;
}

void assemble_forces(IterationState& state, const ImplicitDomain& domain, const SizingField& sizing,
                     const SolverConfig& cfg) {
    const MeshTopology& topo = state.mesh.topology();
    const auto& pts = state.mesh.points();
    const std::size_t n = pts.size();
    const std::vector<double> h = vertex_sizes(pts, sizing);
    state.F_r.assign(n, {});
    state.F_s.assign(n, {});

    std::vector<StarNeighbor> star;
    for (VertexId v = 0; v < n; ++v) {
        if (state.fixed[v]) continue;
        star.clear();
        for (std::uint32_t e : topo.star_edges(v)) {
            const Edge& ed = topo.edges[e];
            star.push_back({pts[ed.other(v)], edge_target(h, ed, cfg)});
        }
        state.F_r[v] = repulsion_force(pts[v], star, cfg.theta_r);
    }

    std::vector<std::vector<SharpeningTerm>> terms(n);
    for (const CrossingEdge& ce : state.band.crossing) {
        if (!ce.resolved) continue;
        const Edge& ed = topo.edges[ce.edge];
        const Triangle& t0 = topo.triangles[ed.tri[0]];
        const Triangle& t1 = topo.triangles[ed.tri[1]];
        const Point2 c1 = state.voronoi.vertices[ed.tri[0]];
        const Point2 c2 = state.voronoi.vertices[ed.tri[1]];
        for (VertexId v : ed.v) {
            if (state.fixed[v]) continue;
            try {
                const Vec2 d = pts[ed.other(v)] - pts[v];
                terms[v].push_back({c1, c2, jacobian_wrt(pts, t0, v), jacobian_wrt(pts, t1, v), ce.normal, d / norm(d)});
            } catch (const DegeneracyError&) {
            }
        }
    }
    for (VertexId v = 0; v < n; ++v) {
        if (terms[v].empty()) continue;
        const SharpeningResult r = sharpening_force(terms[v], state.F_r[v], cfg.theta_s);
        state.F_s[v] = r.F_s;
        state.F_r[v] = r.F_r_corrected;
    }
    state.F_a = attraction_field(pts, topo, state.band, state.fixed, h, domain, cfg);
}

void step(IterationState& state, const ImplicitDomain& domain, const SizingField& sizing, const SolverConfig& cfg) {
    const MeshTopology& topo = state.mesh.topology();
    const std::vector<Point2> start = state.mesh.points();
    const std::size_t n = start.size();
    const std::vector<double> h = vertex_sizes(start, sizing);
    auto keep_inside = [&](Point2 p) { return state.has_frame ? clamp_to(state.frame, p) : p; };

    // w * tau * F with tau = min(1, L0 / (divisor * w * |F|))
    auto capped = [&](Vec2 F, double w, VertexId v) {
        const double L0 = cfg.m_compress * h[v];
        const double f = norm(F);
        const double tau = f > 0.0 ? std::min(1.0, L0 / (cfg.step_cap_divisor * w * f)) : 1.0;
        return (w * tau) * F;
    };
    std::vector<Point2> pos = start;
    for (VertexId v = 0; v < n; ++v)
        if (!state.fixed[v])
            pos[v] = keep_inside(start[v] + capped(state.F_r[v], cfg.w_r, v) + capped(state.F_s[v], cfg.w_s, v));
    for (int m = 0; m < cfg.n_attract; ++m) {
        const std::vector<Vec2> F_a = attraction_field(pos, topo, state.band, state.fixed, h, domain, cfg);
        for (VertexId v = 0; v < n; ++v)
            if (!state.fixed[v]) pos[v] = keep_inside(pos[v] + capped(F_a[v], cfg.tau_a, v));
    }

    std::vector<Vec2> disp(n);
    state.last_displacement.assign(n, 0.0);
    for (VertexId v = 0; v < n; ++v) {
        disp[v] = pos[v] - start[v];
        state.last_displacement[v] = norm(disp[v]) / h[v];
    }
    state.mesh.move_vertices(disp);
    state.last_max_displacement = *std::max_element(state.last_displacement.begin(), state.last_displacement.end());
    ++state.iteration;
    const std::vector<Vec2> F_r = std::move(state.F_r), F_s = std::move(state.F_s), F_a = std::move(state.F_a);
    refresh(state, domain, sizing, cfg);
    // Forces stay attached to the state that produced the step.
    state.F_r = F_r;
    state.F_s = F_s;
    state.F_a = F_a;
}

RunResult run(std::vector<Point2> points, std::vector<bool> fixed, const ImplicitDomain& domain,
              const SizingField& sizing, const SolverConfig& cfg, EventSink* sink) {
    cfg.validate();
    RunResult result;
    result.state = make_state(std::move(points), std::move(fixed), domain, sizing, cfg);
    IterationState& state = result.state;
    if (sink) sink->on_state(state);

    IterationState best;
    std::size_t best_defects = static_cast<std::size_t>(-1);
    int stall = 0;        // whole mesh at rest
    int local_stall = 0;  // at rest away from the defects
    for (int it = 0; it < cfg.max_iterations; ++it) {
        assemble_forces(state, domain, sizing, cfg);
        IterationRecord rec;
        rec.energy = total_energy(state, domain, sizing, cfg);
        step(state, domain, sizing, cfg);
        const std::vector<DefectPolygon> defects = detect_defects(state.band, state.mesh, domain, sizing, cfg);
        stall = state.last_max_displacement < cfg.stall_tol ? stall + 1 : 0;
        const double away = max_displacement_outside(state, defects);
        local_stall = away < cfg.stall_tol ? local_stall + 1 : 0;

        rec.iteration = state.iteration;
        rec.max_displacement = state.last_max_displacement;
        rec.vertices = state.mesh.num_vertices();
        rec.crossing_edges = state.band.crossing.size();
        rec.stable_edges = static_cast<std::size_t>(std::count_if(
            state.band.crossing.begin(), state.band.crossing.end(), [](const CrossingEdge& c) { return c.stable; }));
        rec.defects = defects.size();
        rec.stalled = stall >= cfg.stall_window || (!defects.empty() && local_stall >= cfg.stall_window);
        if (sink) {
            sink->on_iteration(rec);
            sink->on_state(state);
        }
        result.iterations = state.iteration;
        result.remaining_defects = defects.size();
        if (defects.size() < best_defects) {
            best_defects = defects.size();
            best = state;
        }
        if (defects.empty()) {
            if (stall < cfg.stall_window) continue;
            result.converged = true;
            return result;
        }
        if (local_stall < cfg.stall_window) continue;

        std::vector<DefectPolygon> repairable;
        RefinementRecord ref;
        ref.iteration = state.iteration;
        ref.round = result.refinement_rounds + 1;
        ref.defects_before = defects.size();
        for (const DefectPolygon& d : defects) {
            if (d.kind == DefectKind::kPentagon) ++ref.pentagons;
            if (d.kind == DefectKind::kHexagon) ++ref.hexagons;
            if (d.kind == DefectKind::kUnresolvable && sink)
                sink->on_diagnostic(state.iteration, "unresolvable_defect",
                                    "band polygon with " + std::to_string(d.sides) + " sides");
            if (!d.insertions.empty()) repairable.push_back(d);
        }
        if (repairable.empty()) continue;
        const RefineResult rr = refine(state.mesh, repairable);
        ref.inserted = rr.inserted.size();
        ref.skipped = rr.skipped;
        ++result.refinement_rounds;
        if (sink) sink->on_refinement(ref);
        refresh(state, domain, sizing, cfg);
        stall = local_stall = 0;
    }
    if (best_defects < result.remaining_defects) {
        result.state = std::move(best);
        result.remaining_defects = best_defects;
    }
    return result;
}

}  // namespace voromesh
