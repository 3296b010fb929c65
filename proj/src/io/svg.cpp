#include "voromesh/io/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <utility>

namespace voromesh {

namespace {

BoundingBox bounds_of(const std::vector<Point2>& pts) {
    BoundingBox b{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
                  {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
    for (Point2 p : pts) {
        b.min = {std::min(b.min.x, p.x), std::min(b.min.y, p.y)};
        b.max = {std::max(b.max.x, p.x), std::max(b.max.y, p.y)};
    }
    if (pts.empty()) b = {{0, 0}, {1, 1}};
    return b;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Maps world coordinates to pixels with y pointing down.
class Canvas {
public:
    Canvas(const BoundingBox& view, double width_px) : view_(view) {
        const double w = std::max(view.max.x - view.min.x, 1e-300);
        const double h = std::max(view.max.y - view.min.y, 1e-300);
        scale_ = (width_px - 2 * kMargin) / w;
        width_ = width_px;
        height_ = h * scale_ + 2 * kMargin;
    }

    void move(Point2 p) { coord('M', p); }
    void line(Point2 p) { coord('L', p); }
    void close() { path_ += 'Z'; }
    std::string take() { return std::exchange(path_, {}); }

    std::string header(const std::string& title) const {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%.0f\" height=\"%.0f\" "
                      "viewBox=\"0 0 %.0f %.0f\">\n",
                      width_, height_, width_, height_);
        std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out += buf;
        if (!title.empty()) out += "<title>" + escape(title) + "</title>\n";
        out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        return out;
    }

private:
    static constexpr double kMargin = 10.0;

    void coord(char cmd, Point2 p) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%c%.2f %.2f", cmd, kMargin + (p.x - view_.min.x) * scale_,
                      kMargin + (view_.max.y - p.y) * scale_);
        path_ += buf;
    }

    BoundingBox view_;
    double scale_ = 1.0, width_ = 0.0, height_ = 0.0;
    std::string path_;
};

void emit_layer(std::string& doc, const char* id, const char* style, const std::vector<std::string>& paths) {
    if (paths.empty()) return;
    doc += "<g id=\"";
    doc += id;
    doc += "\" ";
    doc += style;
    doc += ">\n";
    for (const std::string& d : paths) doc += "<path d=\"" + d + "\"/>\n";
    doc += "</g>\n";
}

void add_chain(Canvas& c, const std::vector<Point2>& pts, bool closed, std::vector<std::string>& out) {
    if (pts.size() < 2) return;
    c.move(pts[0]);
    for (std::size_t k = 1; k < pts.size(); ++k) c.line(pts[k]);
    if (closed) c.close();
    out.push_back(c.take());
}

constexpr const char* kDelaunayStyle = "fill=\"none\" stroke=\"#8a9bb0\" stroke-width=\"0.5\"";
constexpr const char* kVoronoiStyle = "fill=\"none\" stroke=\"#222222\" stroke-width=\"0.8\"";
constexpr const char* kPolylineStyle =
    "fill=\"none\" stroke=\"#d01c1c\" stroke-width=\"2.2\" stroke-linejoin=\"round\"";
constexpr const char* kDefectStyle = "fill=\"#f4a30a\" fill-opacity=\"0.6\" stroke=\"#b36b00\" stroke-width=\"0.6\"";

}  // namespace

std::string render_svg(const IterationState& state, const std::vector<DefectPolygon>& defects,
                       const SvgOptions& options) {
    const BoundingBox view = options.view ? *options.view
                             : state.has_frame ? state.frame
                                               : bounds_of(state.mesh.points());
    Canvas c(view, options.width_px);
    std::string doc = c.header(options.title);
    const MeshTopology& topo = state.mesh.topology();

    if (options.delaunay) {
        for (const Edge& e : topo.edges) {
            c.move(state.mesh.point(e.v[0]));
            c.line(state.mesh.point(e.v[1]));
        }
        std::vector<std::string> paths;
        if (!topo.edges.empty()) paths.push_back(c.take());
        emit_layer(doc, "delaunay", kDelaunayStyle, paths);
    }
    if (options.voronoi) {
        for (const VoronoiEdge& e : state.voronoi.edges) {
            c.move(state.voronoi.vertices[e.vertices[0]]);
            c.line(state.voronoi.vertices[e.vertices[1]]);
        }
        std::vector<std::string> paths;
        if (!state.voronoi.edges.empty()) paths.push_back(c.take());
        emit_layer(doc, "voronoi", kVoronoiStyle, paths);
    }
    if (options.defects) {
        std::vector<std::string> paths;
        for (const DefectPolygon& d : defects) {
            for (TriangleId t : d.triangles) {
                const Triangle& tri = topo.triangles[t];
                c.move(state.mesh.point(tri.v[0]));
                c.line(state.mesh.point(tri.v[1]));
                c.line(state.mesh.point(tri.v[2]));
                c.close();
            }
            if (!d.triangles.empty()) paths.push_back(c.take());
        }
        emit_layer(doc, "defects", kDefectStyle, paths);
    }
    if (options.polyline) {
        std::vector<std::string> paths;
        for (const BandChain& chain : state.band.chains) {
            std::vector<Point2> pts;
            for (TriangleId t : chain.triangles)
                if (pts.empty() || !(pts.back() == state.voronoi.vertices[t]))
                    pts.push_back(state.voronoi.vertices[t]);
            if (chain.closed)
                while (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
            add_chain(c, pts, chain.closed, paths);
        }
        emit_layer(doc, "polyline", kPolylineStyle, paths);
    }
    doc += "</svg>\n";
    return doc;
}

std::string render_svg(const HybridMesh& mesh, const SvgOptions& options) {
    const BoundingBox view = options.view ? *options.view : bounds_of(mesh.vertices);
    Canvas c(view, options.width_px);
    std::string doc = c.header(options.title);

    if (options.voronoi && !mesh.cells.empty()) {
        doc += "<g id=\"voronoi\" stroke=\"#222222\" stroke-width=\"0.8\">\n";
        for (int tag : {0, 1}) {
            std::vector<std::string> paths;
            for (const HybridCell& cell : mesh.cells)
                if (cell.subdomain == tag) add_chain(c, cell_polygon(mesh, cell), true, paths);
            if (paths.empty()) continue;
            doc += tag == 0 ? "<path fill=\"#ffffff\" d=\"" : "<path fill=\"#cfe0f3\" d=\"";
            for (const std::string& d : paths) doc += d;
            doc += "\"/>\n";
        }
        doc += "</g>\n";
    }
    if (options.polyline) {
        std::vector<std::string> paths;
        for (const PolylineChain& chain : mesh.boundary) {
            std::vector<Point2> pts;
            for (std::uint32_t v : chain.vertices) pts.push_back(mesh.vertices[v]);
            add_chain(c, pts, chain.closed, paths);
        }
        emit_layer(doc, "polyline", kPolylineStyle, paths);
    }
    doc += "</svg>\n";
    return doc;
}

}  // namespace voromesh
