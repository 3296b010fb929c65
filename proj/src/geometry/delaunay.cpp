#include "voromesh/geometry/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "voromesh/errors.hpp"
#include "voromesh/geometry/predicates.hpp"

namespace voromesh {

namespace {

constexpr VertexId kInf = kNoVertex;  // the symbolic vertex at infinity

constexpr int next(int k) { return k == 2 ? 0 : k + 1; }
constexpr int prev(int k) { return k == 0 ? 2 : k - 1; }

// Hilbert index of (x, y) on a 2^16 grid; gives insertion orders with short walks.
std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y) {
    std::uint64_t d = 0;
    for (std::uint32_t s = 1u << 15; s > 0; s >>= 1) {
        const std::uint32_t rx = (x & s) ? 1 : 0;
        const std::uint32_t ry = (y & s) ? 1 : 0;
        d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
    }
    return d;
}

}  // namespace

std::size_t MeshTopology::interior_edge_count() const {
    return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(),
                                                  [](const Edge& e) { return !e.is_hull(); }));
}

bool DelaunayMesh::is_ghost(TriangleId t) const {
    const auto& v = tri_vertices_[t];
    return v[0] == kInf || v[1] == kInf || v[2] == kInf;
}

int DelaunayMesh::index_of(TriangleId t, VertexId v) const {
    const auto& tv = tri_vertices_[t];
    for (int k = 0; k < 3; ++k)
        if (tv[k] == v) return k;
    return -1;
}

int DelaunayMesh::neighbor_index(TriangleId t, TriangleId nb) const {
    const auto& tn = tri_neighbors_[t];
    for (int k = 0; k < 3; ++k)
        if (tn[k] == nb) return k;
    return -1;
}

void DelaunayMesh::set_triangle(TriangleId t, VertexId a, VertexId b, VertexId c) {
    tri_vertices_[t] = {a, b, c};
    for (VertexId v : {a, b, c})
        if (v != kInf) vertex_triangle_[v] = t;
}

TriangleId DelaunayMesh::new_triangle() {
    tri_vertices_.push_back({kInf, kInf, kInf});
    tri_neighbors_.push_back({kNoTriangle, kNoTriangle, kNoTriangle});
    return static_cast<TriangleId>(tri_vertices_.size() - 1);
}

void DelaunayMesh::relink(TriangleId nb, TriangleId from, TriangleId to) {
    if (nb == kNoTriangle) return;
    const int k = neighbor_index(nb, from);
    if (k >= 0) tri_neighbors_[nb][k] = to;
}

DelaunayMesh DelaunayMesh::build(std::span<const Point2> points) {
    if (points.size() < 3) throw InputError("build_delaunay: need at least 3 points");
    for (const Point2& p : points)
        if (!is_finite(p)) throw InputError("build_delaunay: non-finite coordinate");

    DelaunayMesh mesh;
    mesh.points_.assign(points.begin(), points.end());
    mesh.rebuild_from_points();
    return mesh;
}

void DelaunayMesh::rebuild_from_points() {
    const std::size_t n = points_.size();
    Point2 lo = points_[0], hi = points_[0];
    for (const Point2& p : points_) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    duplicate_tol_ = 1e-12 * distance(lo, hi);

    std::vector<VertexId> by_x(n);
    std::iota(by_x.begin(), by_x.end(), 0);
    std::sort(by_x.begin(), by_x.end(), [&](VertexId a, VertexId b) {
        if (points_[a].x != points_[b].x) return points_[a].x < points_[b].x;
        if (points_[a].y != points_[b].y) return points_[a].y < points_[b].y;
        return a < b;
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n && points_[by_x[j]].x - points_[by_x[i]].x <= duplicate_tol_; ++j) {
            if (distance(points_[by_x[i]], points_[by_x[j]]) <= duplicate_tol_) {
                const VertexId a = std::min(by_x[i], by_x[j]);
                const VertexId b = std::max(by_x[i], by_x[j]);
                throw DuplicateVertexError("build_delaunay: vertex " + std::to_string(b) +
                                               " duplicates vertex " + std::to_string(a),
                                           a);
            }
        }
    }

    const Vec2 extent = hi - lo;
    const double sx = extent.x > 0 ? 65535.0 / extent.x : 0.0;
    const double sy = extent.y > 0 ? 65535.0 / extent.y : 0.0;
    std::vector<std::uint64_t> key(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto gx = static_cast<std::uint32_t>((points_[i].x - lo.x) * sx);
        const auto gy = static_cast<std::uint32_t>((points_[i].y - lo.y) * sy);
        key[i] = hilbert_index(gx, gy);
    }
    std::vector<VertexId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
        return key[a] != key[b] ? key[a] < key[b] : a < b;
    });
    initialize(order);
}

void DelaunayMesh::initialize(std::span<const VertexId> order) {
    tri_vertices_.clear();
    tri_neighbors_.clear();
    vertex_triangle_.assign(points_.size(), kNoTriangle);
    topology_.reset();

    // First non-collinear triple in insertion order seeds the triangulation.
    const VertexId i0 = order[0], i1 = order[1];
    std::size_t third = 2;
    int o = 0;
    for (; third < order.size(); ++third) {
        o = orient2d(points_[i0], points_[i1], points_[order[third]]);
        if (o != 0) break;
    }
    if (third == order.size()) throw InputError("build_delaunay: all points are collinear");

    VertexId a = i0, b = i1, c = order[third];
    if (o < 0) std::swap(a, b);

    const TriangleId t0 = new_triangle();
    const TriangleId g_ab = new_triangle();
    const TriangleId g_bc = new_triangle();
    const TriangleId g_ca = new_triangle();
    set_triangle(t0, a, b, c);
    set_triangle(g_ab, b, a, kInf);
    set_triangle(g_bc, c, b, kInf);
    set_triangle(g_ca, a, c, kInf);
    tri_neighbors_[t0] = {g_bc, g_ca, g_ab};
    tri_neighbors_[g_ab] = {g_ca, g_bc, t0};
    tri_neighbors_[g_bc] = {g_ab, g_ca, t0};
    tri_neighbors_[g_ca] = {g_bc, g_ab, t0};
    last_ = t0;

    for (std::size_t i = 2; i < order.size(); ++i) {
        if (i == third) continue;
        const VertexId v = order[i];
        const Location loc = locate(points_[v], last_);
        if (loc.where == Where::kOnVertex) {
            const VertexId existing = tri_vertices_[loc.tri][loc.index];
            throw DuplicateVertexError("build_delaunay: duplicate vertex " + std::to_string(v), existing);
        }
        insert_located(v, loc);
    }
    ++generation_;
}

DelaunayMesh::Location DelaunayMesh::locate(Point2 p, TriangleId hint) const {
    TriangleId t = hint == kNoTriangle ? 0 : hint;
    if (is_ghost(t)) {
        const int k = index_of(t, kInf);
        t = tri_neighbors_[t][k];
    }
    // Remembering walk: the edge test start rotates pseudo-randomly so the walk
    // cannot cycle on degenerate configurations.
    std::uint32_t rng = 0x9e3779b9u;
    const std::size_t max_steps = 4 * tri_vertices_.size() + 16;
    TriangleId came_from = kNoTriangle;
    for (std::size_t step = 0; step < max_steps; ++step) {
        if (is_ghost(t)) return {t, Where::kOutside, index_of(t, kInf)};
        rng = rng * 1664525u + 1013904223u;
        const int start = static_cast<int>((rng >> 16) % 3);
        bool moved = false;
        int zeros = 0;
        int zero_edge = -1;
        const auto& tv = tri_vertices_[t];
        for (int i = 0; i < 3; ++i) {
            const int k = (start + i) % 3;
            const TriangleId nb = tri_neighbors_[t][k];
            const int o = orient2d(points_[tv[next(k)]], points_[tv[prev(k)]], p);
            if (o < 0) {
                if (nb == came_from) continue;
                came_from = t;
                t = nb;
                moved = true;
                break;
            }
            if (o == 0) {
                ++zeros;
                zero_edge = k;
            }
        }
        if (moved) continue;
        // Every edge we skipped because it led back must be rechecked.
        bool back = false;
        for (int k = 0; k < 3; ++k) {
            if (tri_neighbors_[t][k] == came_from &&
                orient2d(points_[tv[next(k)]], points_[tv[prev(k)]], p) < 0) {
                came_from = t;
                t = tri_neighbors_[t][k];
                back = true;
                break;
            }
        }
        if (back) continue;
        if (zeros == 0) return {t, Where::kInside, -1};
        if (zeros == 1) return {t, Where::kOnEdge, zero_edge};
        for (int k = 0; k < 3; ++k)
            if (points_[tv[k]] == p) return {t, Where::kOnVertex, k};
        return {t, Where::kOnEdge, zero_edge};
    }
    // Walk failed to terminate; scan everything.
    for (TriangleId s = 0; s < tri_vertices_.size(); ++s) {
        if (is_ghost(s)) continue;
        const auto& tv = tri_vertices_[s];
        int zeros = 0, zero_edge = -1;
        bool inside = true;
        for (int k = 0; k < 3 && inside; ++k) {
            const int o = orient2d(points_[tv[next(k)]], points_[tv[prev(k)]], p);
            if (o < 0) inside = false;
            if (o == 0) {
                ++zeros;
                zero_edge = k;
            }
        }
        if (!inside) continue;
        if (zeros == 0) return {s, Where::kInside, -1};
        for (int k = 0; k < 3; ++k)
            if (points_[tv[k]] == p) return {s, Where::kOnVertex, k};
        return {s, Where::kOnEdge, zero_edge};
    }
    for (TriangleId s = 0; s < tri_vertices_.size(); ++s) {
        if (!is_ghost(s)) continue;
        const int k = index_of(s, kInf);
        const auto& tv = tri_vertices_[s];
        if (orient2d(points_[tv[next(k)]], points_[tv[prev(k)]], p) > 0) return {s, Where::kOutside, k};
    }
    return {kNoTriangle, Where::kOutside, -1};
}

void DelaunayMesh::check_near_duplicate(const Location& loc, Point2 p, double tol) const {
    if (tol <= 0.0) return;
    auto check_tri = [&](TriangleId t) {
        if (t == kNoTriangle) return;
        for (VertexId v : tri_vertices_[t])
            if (v != kInf && distance(points_[v], p) <= tol)
                throw DuplicateVertexError("insert_vertex: point duplicates vertex " + std::to_string(v), v);
    };
    check_tri(loc.tri);
    for (TriangleId nb : tri_neighbors_[loc.tri]) check_tri(nb);
}

VertexId DelaunayMesh::insert_located(VertexId id, const Location& loc) {
    std::vector<std::pair<TriangleId, int>> stack;
    if (loc.where == Where::kOnEdge)
        split_edge(loc.tri, loc.index, id, stack);
    else
        split_triangle(loc.tri, id, stack);
    legalize(stack);
    return id;
}

void DelaunayMesh::split_triangle(TriangleId t, VertexId p, std::vector<std::pair<TriangleId, int>>& stack) {
    const auto [v0, v1, v2] = tri_vertices_[t];
    const auto [n0, n1, n2] = tri_neighbors_[t];
    const TriangleId t1 = new_triangle();
    const TriangleId t2 = new_triangle();
    set_triangle(t, v0, v1, p);
    set_triangle(t1, v1, v2, p);
    set_triangle(t2, v2, v0, p);
    tri_neighbors_[t] = {t1, t2, n2};
    tri_neighbors_[t1] = {t2, t, n0};
    tri_neighbors_[t2] = {t, t1, n1};
    relink(n0, t, t1);
    relink(n1, t, t2);
    last_ = t;
    stack.push_back({t, 2});
    stack.push_back({t1, 2});
    stack.push_back({t2, 2});
}

void DelaunayMesh::split_edge(TriangleId t, int k, VertexId p, std::vector<std::pair<TriangleId, int>>& stack) {
    const VertexId c = tri_vertices_[t][k];
    const VertexId a = tri_vertices_[t][next(k)];
    const VertexId b = tri_vertices_[t][prev(k)];
    const TriangleId u = tri_neighbors_[t][k];
    const TriangleId n_bc = tri_neighbors_[t][next(k)];  // opposite a
    const TriangleId n_ca = tri_neighbors_[t][prev(k)];  // opposite b
    const int m = neighbor_index(u, t);
    const VertexId d = tri_vertices_[u][m];
    // u = (b, a, d) rotated so d sits at m
    const TriangleId n_ad = tri_neighbors_[u][index_of(u, b)];
    const TriangleId n_db = tri_neighbors_[u][index_of(u, a)];

    const TriangleId t1b = new_triangle();
    const TriangleId t2b = new_triangle();
    set_triangle(t, a, p, c);
    set_triangle(t1b, p, b, c);
    set_triangle(u, b, p, d);
    set_triangle(t2b, p, a, d);
    tri_neighbors_[t] = {t1b, n_ca, t2b};
    tri_neighbors_[t1b] = {n_bc, t, u};
    tri_neighbors_[u] = {t2b, n_db, t1b};
    tri_neighbors_[t2b] = {n_ad, u, t};
    relink(n_bc, t, t1b);
    relink(n_ad, u, t2b);
    last_ = t;
    stack.push_back({t, 1});
    stack.push_back({t1b, 0});
    stack.push_back({u, 1});
    stack.push_back({t2b, 0});
}

bool DelaunayMesh::should_flip(TriangleId t, int k) const {
    const VertexId c = tri_vertices_[t][k];
    const VertexId a = tri_vertices_[t][next(k)];
    const VertexId b = tri_vertices_[t][prev(k)];
    const TriangleId u = tri_neighbors_[t][k];
    const VertexId d = tri_vertices_[u][neighbor_index(u, t)];
    if (c == kInf || d == kInf) return false;
    // Two ghosts around a hull vertex: flip when that vertex became reflex.
    if (a == kInf) return orient2d(points_[d], points_[b], points_[c]) > 0;
    if (b == kInf) return orient2d(points_[c], points_[a], points_[d]) > 0;
    const int s = in_circle_unchecked(points_[a], points_[b], points_[c], points_[d]);
    if (s != 0) return s > 0;
    return std::min(c, d) < std::min(a, b);
}

void DelaunayMesh::flip(TriangleId t, int k) {
    const VertexId c = tri_vertices_[t][k];
    const VertexId a = tri_vertices_[t][next(k)];
    const VertexId b = tri_vertices_[t][prev(k)];
    const TriangleId u = tri_neighbors_[t][k];
    const TriangleId n_bc = tri_neighbors_[t][next(k)];
    const TriangleId n_ca = tri_neighbors_[t][prev(k)];
    const int m = neighbor_index(u, t);
    const VertexId d = tri_vertices_[u][m];
    const TriangleId n_ad = tri_neighbors_[u][index_of(u, b)];
    const TriangleId n_db = tri_neighbors_[u][index_of(u, a)];

    set_triangle(t, c, a, d);
    set_triangle(u, d, b, c);
    tri_neighbors_[t] = {n_ad, u, n_ca};
    tri_neighbors_[u] = {n_bc, t, n_db};
    relink(n_ad, u, t);
    relink(n_bc, t, u);
    if (a != kInf) vertex_triangle_[a] = t;
    if (b != kInf) vertex_triangle_[b] = u;
}

void DelaunayMesh::legalize(std::vector<std::pair<TriangleId, int>>& stack) {
    // Each entry names the edge opposite the freshly inserted vertex.
    while (!stack.empty()) {
        const auto [t, k] = stack.back();
        stack.pop_back();
        if (!should_flip(t, k)) continue;
        const TriangleId u = tri_neighbors_[t][k];
        const VertexId p = tri_vertices_[t][k];
        flip(t, k);
        // After the flip t = (p, a, d) and u = (d, b, p).
        stack.push_back({t, index_of(t, p)});
        stack.push_back({u, index_of(u, p)});
    }
}

VertexId DelaunayMesh::insert_vertex(Point2 p) {
    if (!is_finite(p)) throw InputError("insert_vertex: non-finite coordinate");
    if (tri_vertices_.empty()) throw InputError("insert_vertex: empty mesh");
    const Location loc = locate(p, last_);
    if (loc.where == Where::kOnVertex) {
        const VertexId existing = tri_vertices_[loc.tri][loc.index];
        throw DuplicateVertexError("insert_vertex: point coincides with vertex " + std::to_string(existing),
                                   existing);
    }
    if (loc.where == Where::kOutside) throw OutsideHullError("insert_vertex: point outside convex hull");
    if (loc.where == Where::kOnEdge) {
        const TriangleId u = tri_neighbors_[loc.tri][loc.index];
        if (is_ghost(u)) throw OutsideHullError("insert_vertex: point on convex hull boundary");
    }
    check_near_duplicate(loc, p, duplicate_tol_);

    const auto id = static_cast<VertexId>(points_.size());
    points_.push_back(p);
    vertex_triangle_.push_back(kNoTriangle);
    insert_located(id, loc);
    ++generation_;
    topology_.reset();
    return id;
}

void DelaunayMesh::move_vertices(std::span<const Vec2> displacements) {
    if (displacements.size() != points_.size())
        throw InputError("move_vertices: displacement count does not match vertex count");
    for (const Vec2& d : displacements)
        if (!is_finite(d)) throw InputError("move_vertices: non-finite displacement");
    std::vector<Point2> moved(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) moved[i] = points_[i] + displacements[i];
    set_positions(moved);
}

void DelaunayMesh::set_positions(std::span<const Point2> positions) {
    if (positions.size() != points_.size())
        throw InputError("set_positions: position count does not match vertex count");
    for (const Point2& p : positions)
        if (!is_finite(p)) throw InputError("set_positions: non-finite coordinate");
    const bool unchanged = std::equal(positions.begin(), positions.end(), points_.begin());
    std::copy(positions.begin(), positions.end(), points_.begin());
    last_flips_ = 0;
    last_rebuilt_ = false;
    if (unchanged) return;
    relegalize_after_move();
    ++generation_;
    topology_.reset();
}

void DelaunayMesh::relegalize_after_move() {
    // Folded or collapsed triangles cannot be repaired by Delaunay flips.
    // Ghost triangles only need their hull edge to still see the outside,
    // which a fixed hull guarantees; any violation triggers the rebuild too.
    for (TriangleId t = 0; t < tri_vertices_.size(); ++t) {
        const auto& tv = tri_vertices_[t];
        if (is_ghost(t)) continue;
        if (orient2d(points_[tv[0]], points_[tv[1]], points_[tv[2]]) <= 0) {
            last_rebuilt_ = true;
            rebuild_from_points();
            return;
        }
    }
    for (TriangleId t = 0; t < tri_vertices_.size(); ++t) {
        if (!is_ghost(t)) continue;
        const int k = index_of(t, kInf);
        const auto& tv = tri_vertices_[t];
        // The finite neighbor must stay on the interior side of the hull edge.
        const TriangleId inner = tri_neighbors_[t][k];
        const VertexId opp = tri_vertices_[inner][neighbor_index(inner, t)];
        if (orient2d(points_[tv[next(k)]], points_[tv[prev(k)]], points_[opp]) >= 0) {
            last_rebuilt_ = true;
            rebuild_from_points();
            return;
        }
    }

    const std::size_t budget = 10 * points_.size();
    std::vector<std::pair<TriangleId, int>> queue;
    queue.reserve(3 * tri_vertices_.size());
    for (TriangleId t = 0; t < tri_vertices_.size(); ++t)
        for (int k = 0; k < 3; ++k)
            if (t < tri_neighbors_[t][k]) queue.push_back({t, k});
    std::size_t flips = 0;
    while (!queue.empty()) {
        const auto [t, k] = queue.back();
        queue.pop_back();
        if (!should_flip(t, k)) continue;
        const TriangleId u = tri_neighbors_[t][k];
        flip(t, k);
        if (++flips > budget) {
            last_rebuilt_ = true;
            rebuild_from_points();
            return;
        }
        for (int i = 0; i < 3; ++i) {
            queue.push_back({t, i});
            queue.push_back({u, i});
        }
    }
    last_flips_ = flips;
}

const MeshTopology& DelaunayMesh::topology() const {
    if (topology_ && topology_->generation == generation_) return *topology_;

    auto topo = std::make_shared<MeshTopology>();
    topo->generation = generation_;
    const std::size_t nv = points_.size();

    std::vector<TriangleId> public_id(tri_vertices_.size(), kNoTriangle);
    for (TriangleId t = 0; t < tri_vertices_.size(); ++t) {
        if (is_ghost(t)) continue;
        public_id[t] = static_cast<TriangleId>(topo->triangles.size());
        topo->triangles.push_back({tri_vertices_[t]});
    }

    for (TriangleId t = 0; t < tri_vertices_.size(); ++t) {
        if (is_ghost(t)) continue;
        for (int k = 0; k < 3; ++k) {
            const TriangleId u = tri_neighbors_[t][k];
            const VertexId a = tri_vertices_[t][next(k)];
            const VertexId b = tri_vertices_[t][prev(k)];
            const bool hull = is_ghost(u);
            if (!hull && a > b) continue;  // emit interior edges once, from the a < b side
            Edge e;
            e.v = {a, b};
            e.tri = {public_id[t], hull ? kNoTriangle : public_id[u]};
            e.opposite = {tri_vertices_[t][k], hull ? kNoVertex : tri_vertices_[u][neighbor_index(u, t)]};
            topo->edges.push_back(e);
        }
    }

    std::vector<std::uint32_t> degree(nv + 1, 0);
    for (const Edge& e : topo->edges) {
        ++degree[e.v[0]];
        ++degree[e.v[1]];
    }
    topo->vertex_edge_offsets.assign(nv + 1, 0);
    for (std::size_t i = 0; i < nv; ++i) topo->vertex_edge_offsets[i + 1] = topo->vertex_edge_offsets[i] + degree[i];
    topo->vertex_edges.resize(topo->vertex_edge_offsets[nv]);
    std::vector<std::uint32_t> fill(topo->vertex_edge_offsets.begin(), topo->vertex_edge_offsets.end() - 1);
    for (std::uint32_t i = 0; i < topo->edges.size(); ++i) {
        topo->vertex_edges[fill[topo->edges[i].v[0]]++] = i;
        topo->vertex_edges[fill[topo->edges[i].v[1]]++] = i;
    }

    topo->on_hull.assign(nv, false);
    topo->vertex_triangle_offsets.assign(nv + 1, 0);
    topo->vertex_triangles.reserve(3 * topo->triangles.size());
    for (VertexId v = 0; v < nv; ++v) {
        const TriangleId start = vertex_triangle_[v];
        // Walk counterclockwise: in (v, x, y) the next triangle shares edge v-y.
        TriangleId t = start;
        TriangleId first = start;
        do {
            if (is_ghost(t)) {
                topo->on_hull[v] = true;
                first = t;
            }
            const int i = index_of(t, v);
            t = tri_neighbors_[t][next(i)];
        } while (t != start);
        if (topo->on_hull[v]) {
            // Begin after the last ghost so the finite fan is contiguous.
            t = first;
            do {
                const int i = index_of(t, v);
                t = tri_neighbors_[t][next(i)];
            } while (is_ghost(t));
            first = t;
        }
        t = first;
        do {
            if (!is_ghost(t)) topo->vertex_triangles.push_back(public_id[t]);
            const int i = index_of(t, v);
            t = tri_neighbors_[t][next(i)];
        } while (t != first);
        topo->vertex_triangle_offsets[v + 1] = static_cast<std::uint32_t>(topo->vertex_triangles.size());
    }

    topology_ = std::move(topo);
    return *topology_;
}

}  // namespace voromesh
