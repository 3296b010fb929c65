#include "voromesh/io/job.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "voromesh/io/lattice.hpp"
#include "voromesh/io/svg.hpp"

namespace voromesh {

using nlohmann::ordered_json;

const std::string* JobOutputs::find(const std::string& name) const {
    for (const File& f : files)
        if (f.name == name) return &f.content;
    return nullptr;
}

std::string format_mesh(const HybridMesh& mesh) {
    std::string out = std::to_string(mesh.vertices.size()) + " " + std::to_string(mesh.cells.size()) + "\n";
    char buf[80];
    for (Point2 p : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
        out += buf;
    }
    for (const HybridCell& c : mesh.cells) {
        out += std::to_string(c.vertices.size());
        for (std::uint32_t v : c.vertices) out += " " + std::to_string(v);
        out += " " + std::to_string(c.subdomain) + "\n";
    }
    return out;
}

namespace {

// Non-finite values have no JSON spelling.
ordered_json number(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

}  // namespace

void EventLog::record(const std::string& json_line) {
    text_ += json_line;
    text_ += '\n';
}

void EventLog::on_iteration(const IterationRecord& r) {
    ordered_json j;
    j["event"] = "iteration";
    j["iteration"] = r.iteration;
    j["energy"] = {{"repulsion", number(r.energy.repulsion)},
                   {"sharpening", number(r.energy.sharpening)},
                   {"attraction", number(r.energy.attraction)},
                   {"total", number(r.energy.total)}};
    j["max_displacement"] = number(r.max_displacement);
    j["vertices"] = r.vertices;
    j["crossing_edges"] = r.crossing_edges;
    j["stable_edges"] = r.stable_edges;
    j["defects"] = r.defects;
    j["stalled"] = r.stalled;
    record(j.dump());
}

void EventLog::on_refinement(const RefinementRecord& r) {
    ordered_json j;
    j["event"] = "refinement";
    j["iteration"] = r.iteration;
    j["round"] = r.round;
    j["defects_before"] = r.defects_before;
    j["pentagons"] = r.pentagons;
    j["hexagons"] = r.hexagons;
    j["inserted"] = r.inserted;
    j["skipped"] = r.skipped;
    record(j.dump());
}

void EventLog::on_diagnostic(int iteration, const std::string& kind, const std::string& message) {
    ordered_json j;
    j["event"] = "diagnostic";
    j["iteration"] = iteration;
    j["kind"] = kind;
    j["message"] = message;
    record(j.dump());
}

std::string snapshot_name(int iteration) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "snapshot_%06d.svg", iteration);
    return buf;
}

std::string quality_report_json(const JobResult& result, const std::vector<Subdomain>& subdomains) {
    const QualityReport& q = result.quality;
    ordered_json j;
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    j["vertices"] = result.vertices;
    j["refinement_rounds"] = result.refinement_rounds;
    j["remaining_defects"] = result.remaining_defects;
    j["boundary_distance"] = {{"vertex_max", number(q.vertex_distance_max)},
                              {"vertex_mean", number(q.vertex_distance_mean)},
                              {"midpoint_max", number(q.midpoint_distance_max)},
                              {"midpoint_mean", number(q.midpoint_distance_mean)}};
    j["crossing_edges"] = {{"stable", q.stable_crossing_edges},
                           {"stable_within_10deg", q.aligned_within_10deg},
                           {"resolved", q.crossing_edges},
                           {"resolved_within_10deg", q.crossing_aligned_within_10deg},
                           {"angle_histogram_5deg", q.angle_histogram}};
    j["band_polygons"] = {{"total", q.band_polygons},
                          {"non_quad", q.non_quad_band_polygons},
                          {"corner", q.corner_band_polygons}};
    j["cells"] = {{"count", q.cells},
                  {"quality_min", number(q.cell_quality_min)},
                  {"quality_mean", number(q.cell_quality_mean)},
                  {"short_edges", q.short_edges},
                  {"shortest_edge", number(q.shortest_edge)}};
    j["collapse"] = {{"candidates", q.collapse.candidates},
                     {"merged", q.collapse.merged},
                     {"skipped_nonconvex", q.collapse.skipped_nonconvex}};
    ordered_json corners = ordered_json::array();
    for (const CornerDistance& c : q.corners)
        corners.push_back({{"summit", {c.summit.x, c.summit.y}}, {"distance", number(c.distance)}});
    j["corners"] = corners;
    ordered_json subs = ordered_json::array();
    for (const Subdomain& s : subdomains) subs.push_back({{"tag", s.tag}, {"cells", s.cells.size()}});
    j["subdomains"] = subs;
    return j.dump(2) + "\n";
}

namespace {

// Logs events, takes scheduled snapshots and forwards everything to the observer.
class JobSink : public EventSink {
public:
    JobSink(const RunSpec& spec, const ImplicitDomain& domain, EventLog& log, JobOutputs& out, EventSink* observer)
        : spec_(spec), domain_(domain), log_(log), out_(out), observer_(observer),
          pending_(spec.snapshots.begin(), spec.snapshots.end()) {}

    void on_iteration(const IterationRecord& r) override {
        log_.on_iteration(r);
        if (observer_) observer_->on_iteration(r);
    }
    void on_refinement(const RefinementRecord& r) override {
        log_.on_refinement(r);
        if (observer_) observer_->on_refinement(r);
    }
    void on_diagnostic(int iteration, const std::string& kind, const std::string& message) override {
        log_.on_diagnostic(iteration, kind, message);
        if (observer_) observer_->on_diagnostic(iteration, kind, message);
    }
    void on_state(const IterationState& state) override {
        if (pending_.erase(state.iteration)) {
            const auto defects = detect_defects(state.band, state.mesh, domain_, spec_.sizing, spec_.solver);
            SvgOptions opt;
            opt.title = "iteration " + std::to_string(state.iteration);
            const std::string name = snapshot_name(state.iteration);
            out_.files.push_back({name, render_svg(state, defects, opt)});
            ordered_json j;
            j["event"] = "snapshot";
            j["iteration"] = state.iteration;
            j["file"] = name;
            j["defects"] = defects.size();
            std::size_t stable = 0, aligned = 0;
            for (std::uint32_t k = 0; k < state.band.crossing.size(); ++k) {
                if (!state.band.crossing[k].stable) continue;
                ++stable;
                if (normal_deviation_deg(state.band, state.mesh, k) <= 10.0) ++aligned;
            }
            double deviation = 0.0;
            for (const BandChain& chain : state.band.chains)
                for (TriangleId t : chain.triangles) {
                    const Point2 v = state.voronoi.vertices[t];
                    deviation = std::max(deviation, distance_to_boundary(domain_, v) / spec_.sizing(v));
                }
            j["crossing_edges"] = state.band.crossing.size();
            j["stable_edges"] = stable;
            j["stable_within_10deg"] = aligned;
            j["polyline_distance_max"] = number(deviation);
            log_.record(j.dump());
        }
        if (observer_) observer_->on_state(state);
    }

    const std::set<int>& missed() const { return pending_; }

private:
    const RunSpec& spec_;
    const ImplicitDomain& domain_;
    EventLog& log_;
    JobOutputs& out_;
    EventSink* observer_;
    std::set<int> pending_;
};

}  // namespace

JobResult run_job(const RunSpec& spec, EventSink* observer) {
    validate_spec(spec);
    const ImplicitDomain domain(spec.domain, spec.frame.box);
    const Lattice lattice = init_lattice(spec.frame.box, spec.frame.spacing, spec.seed, spec.jitter);

    JobResult job;
    job.outputs.files.push_back({"spec.json", serialize_spec(spec)});
    EventLog log;
    {
        ordered_json j;
        j["event"] = "start";
        j["lattice"] = {lattice.nx, lattice.ny};
        j["vertices"] = lattice.points.size();
        j["corners"] = domain.corners().size();
        log.record(j.dump());
    }

    JobSink sink(spec, domain, log, job.outputs, observer);
    const RunResult result = run(lattice.points, lattice.fixed, domain, spec.sizing, spec.solver, &sink);
    for (int it : sink.missed()) sink.on_diagnostic(result.iterations, "snapshot_missed",
                                                    "iteration " + std::to_string(it) + " was never reached");

    const IterationState& s = result.state;
    const HybridMesh hybrid = collapse_short_edges(s.voronoi, s.mesh, s.band, spec.sizing, spec.collapse);
    job.converged = result.converged;
    job.iterations = result.iterations;
    job.vertices = s.mesh.num_vertices();
    job.refinement_rounds = result.refinement_rounds;
    job.remaining_defects = result.remaining_defects;
    job.quality = quality_report(hybrid, s.band, s.mesh, domain, spec.sizing, spec.collapse.delta);
    const std::vector<Subdomain> subdomains = extract_subdomains(hybrid, domain);

    {
        ordered_json j;
        j["event"] = "done";
        j["converged"] = job.converged;
        j["iterations"] = job.iterations;
        j["refinement_rounds"] = job.refinement_rounds;
        j["remaining_defects"] = job.remaining_defects;
        j["vertices"] = job.vertices;
        j["cells"] = hybrid.cells.size();
        log.record(j.dump());
    }

    SvgOptions opt;
    opt.title = "final state, iteration " + std::to_string(result.iterations);
    job.outputs.files.push_back(
        {"final.svg", render_svg(s, detect_defects(s.band, s.mesh, domain, spec.sizing, spec.solver), opt)});
    opt.title = "hybrid mesh";
    opt.view = spec.frame.box;
    job.outputs.files.push_back({"mesh.svg", render_svg(hybrid, opt)});
    job.outputs.files.push_back({"mesh.txt", format_mesh(hybrid)});
    job.outputs.files.push_back({"report.json", quality_report_json(job, subdomains)});
    job.outputs.files.push_back({"events.jsonl", log.text()});
    return job;
}

void write_outputs(const JobOutputs& outputs, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    for (const JobOutputs::File& f : outputs.files) {
        std::ofstream os(directory / f.name, std::ios::binary | std::ios::trunc);
        os.write(f.content.data(), static_cast<std::streamsize>(f.content.size()));
        if (!os) throw std::runtime_error("cannot write " + (directory / f.name).string());
    }
}

}  // namespace voromesh
